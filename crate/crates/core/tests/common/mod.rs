#![allow(dead_code)]

use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use syrec::frontend::SignalKind;
use syrec::{compile, ElabSettings, ElaboratedProgram, SignalState, SynthSettings, SynthesisMode, SynthesisResult};

pub const MODES: [SynthesisMode; 2] = [SynthesisMode::CostAware, SynthesisMode::LineAware];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// `(file stem, source)` for every corpus program, sorted by name.
pub fn corpus() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "syrec"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

pub fn build(src: &str) -> ElaboratedProgram {
    compile(src, &ElabSettings::default()).unwrap_or_else(|d| panic!("{}", d.render("<test>")))
}

pub fn synth(p: &ElaboratedProgram, mode: SynthesisMode) -> SynthesisResult {
    syrec::synthesize(p, mode, &SynthSettings::default()).unwrap()
}

/// Entry signals whose initial value comes from the caller.
pub fn inputs_of(p: &ElaboratedProgram) -> Vec<(String, u32)> {
    p.entry()
        .signals()
        .filter(|s| s.kind.is_primary_input())
        .map(|s| (s.name.to_string(), s.width.unwrap()))
        .collect()
}

pub fn outputs_of(p: &ElaboratedProgram) -> Vec<String> {
    p.entry()
        .signals()
        .filter(|s| s.kind != SignalKind::Wire)
        .map(|s| s.name.to_string())
        .collect()
}

pub fn input_bits(sigs: &[(String, u32)]) -> u32 {
    sigs.iter().map(|(_, w)| w).sum()
}

/// Splits `word` over the signals, first signal in the low bits.
pub fn assignment(sigs: &[(String, u32)], word: u64) -> SignalState {
    let mut shift = 0;
    sigs.iter()
        .map(|(n, w)| {
            let v = (word >> shift) & ((1u64 << w) - 1);
            shift += w;
            (n.clone(), v)
        })
        .collect()
}

/// Every assignment when the inputs total at most `limit` bits, otherwise
/// `samples` seeded random ones.
pub fn assignments(sigs: &[(String, u32)], limit: u32, samples: usize, seed: u64) -> Vec<SignalState> {
    let bits = input_bits(sigs);
    if bits <= limit {
        (0..1u64 << bits).map(|w| assignment(sigs, w)).collect()
    } else {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..samples)
            .map(|_| {
                sigs.iter()
                    .map(|(n, w)| (n.clone(), rng.gen::<u64>() & mask(*w)))
                    .collect()
            })
            .collect()
    }
}

pub fn mask(w: u32) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1 << w) - 1
    }
}

/// A value for every signal of the entry module, wires and outputs included.
pub fn random_state(p: &ElaboratedProgram, rng: &mut StdRng) -> SignalState {
    p.entry()
        .signals()
        .map(|s| (s.name.to_string(), rng.gen::<u64>() & mask(s.width.unwrap())))
        .collect()
}

/// Source of `p` extended by a new entry module that calls `module` and
/// immediately uncalls it with the same arguments. `None` when the module
/// declares local signals or takes no parameters.
pub fn call_uncall_source(p: &ElaboratedProgram, module: &str) -> Option<String> {
    let m = p.module(module)?;
    if !m.locals.is_empty() || m.params.is_empty() {
        return None;
    }
    let mut program = p.program().clone();
    for md in &mut program.modules {
        if md.name == "main" {
            md.name = "main_body".into();
        }
    }
    let callee = if module == "main" { "main_body" } else { module };
    let params: Vec<String> = m
        .params
        .iter()
        .map(|q| format!("{} {}({})", q.direction.keyword(), q.name, q.width.unwrap()))
        .collect();
    let args: Vec<&str> = m.params.iter().map(|q| q.name.as_str()).collect();
    let args = args.join(", ");
    Some(format!(
        "{program}\nmodule main({})\n  call {callee}({args});\n  uncall {callee}({args})\n",
        params.join(", ")
    ))
}

/// `(file, module)` for every module of every corpus program.
pub fn corpus_modules() -> Vec<(String, ElaboratedProgram, String)> {
    let mut out = Vec::new();
    for (name, src) in corpus() {
        let p = build(&src);
        for m in &p.program().modules {
            out.push((name.clone(), p.clone(), m.name.clone()));
        }
    }
    out
}
