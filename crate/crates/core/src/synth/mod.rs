//! Lowering of elaborated programs to reversible circuits.

mod lower;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{statistics, Circuit, CircuitStats, QuantumCost};
use crate::frontend::{mask, ElaboratedProgram, SignalKind};
use crate::gates::BlockError;
use crate::interp::SignalState;
use crate::sim::BitWord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthesisMode {
    /// Intermediate results go to fresh lines that are never cleaned up.
    CostAware,
    /// Intermediate results are computed in place and undone afterwards.
    LineAware,
}

impl SynthesisMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthesisMode::CostAware => "cost-aware",
            SynthesisMode::LineAware => "line-aware",
        }
    }
}

impl fmt::Display for SynthesisMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SynthesisMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cost-aware" | "cost" => Ok(SynthesisMode::CostAware),
            "line-aware" | "line" => Ok(SynthesisMode::LineAware),
            other => Err(format!("unknown synthesis mode '{other}' (expected cost-aware or line-aware)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthSettings {
    pub max_lines: usize,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self { max_lines: 4096 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundSignal {
    pub kind: SignalKind,
    /// LSB first.
    pub lines: Vec<usize>,
}

/// Lines of every signal of the entry module, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SignalBinding {
    pub signals: IndexMap<String, BoundSignal>,
    /// Ancilla lines handed out by the helper allocator.
    pub helpers: Vec<usize>,
}

impl SignalBinding {
    pub fn get(&self, name: &str) -> Option<&BoundSignal> {
        self.signals.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BoundSignal)> {
        self.signals.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisResult {
    pub program: String,
    pub mode: SynthesisMode,
    pub circuit: Circuit,
    pub binding: SignalBinding,
    pub stats: CircuitStats,
    /// Number of ancilla lines the synthesizer had to add.
    pub helper_lines: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("circuit would exceed the limit of {limit} lines")]
    LineBudget { limit: usize },
    #[error("unknown module {0}")]
    UnknownModule(String),
    #[error(transparent)]
    Block(BlockError),
}

impl From<BlockError> for SynthError {
    fn from(e: BlockError) -> Self {
        match e {
            BlockError::LineBudget { limit } => SynthError::LineBudget { limit },
            other => SynthError::Block(other),
        }
    }
}

pub fn synthesize(
    program: &ElaboratedProgram,
    mode: SynthesisMode,
    settings: &SynthSettings,
) -> Result<SynthesisResult, SynthError> {
    let (circuit, binding) = lower::lower(program, mode, settings)?;
    let stats = statistics(&circuit, &QuantumCost);
    Ok(SynthesisResult {
        program: program.entry().name.clone(),
        mode,
        helper_lines: binding.helpers.len(),
        circuit,
        binding,
        stats,
    })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("unassigned input {0}")]
    MissingInput(String),
    #[error("{0} is not a signal of the circuit")]
    UnknownSignal(String),
    #[error("{name} can not be assigned an initial value")]
    NotAssignable { name: String },
    #[error("value {value} does not fit signal {name} of width {width}")]
    ValueTooWide { name: String, value: u64, width: usize },
}

/// Places signal values at their lines. Primary inputs are required; `out`
/// signals default to 0; wires are always 0.
pub fn embed_inputs(binding: &SignalBinding, inputs: &SignalState, line_count: usize) -> Result<BitWord, EmbedError> {
    for (name, _) in inputs.iter() {
        match binding.get(name) {
            None => return Err(EmbedError::UnknownSignal(name.to_string())),
            Some(s) if matches!(s.kind, SignalKind::Wire) => {
                return Err(EmbedError::NotAssignable { name: name.to_string() })
            }
            Some(_) => {}
        }
    }
    let mut word = BitWord::zeros(line_count);
    for (name, sig) in binding.iter() {
        let value = match inputs.get(name) {
            Some(v) => v,
            None if sig.kind.is_primary_input() => return Err(EmbedError::MissingInput(name.to_string())),
            None => 0,
        };
        let width = sig.lines.len();
        if width < 64 && value > mask(width as u32) {
            return Err(EmbedError::ValueTooWide {
                name: name.to_string(),
                value,
                width,
            });
        }
        for (i, &line) in sig.lines.iter().enumerate() {
            word.set(line, value >> i & 1 == 1);
        }
    }
    Ok(word)
}

/// Reads every non-wire signal of the binding from `word`.
pub fn extract_outputs(binding: &SignalBinding, word: &BitWord) -> SignalState {
    binding
        .iter()
        .filter(|(_, s)| !matches!(s.kind, SignalKind::Wire))
        .map(|(name, s)| {
            let v = s
                .lines
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &l)| acc | (word.get(l) as u64) << i);
            (name, v)
        })
        .collect()
}

/// Synthesizes, embeds `inputs`, simulates, and extracts the result.
pub fn simulate_program(result: &SynthesisResult, inputs: &SignalState) -> Result<SignalState, EmbedError> {
    let word = embed_inputs(&result.binding, inputs, result.circuit.line_count())?;
    let out = crate::sim::run_wide(&result.circuit, &word);
    Ok(extract_outputs(&result.binding, &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::frontend::{compile, ElabSettings};

    fn synth(src: &str, mode: SynthesisMode) -> SynthesisResult {
        let p = compile(src, &ElabSettings::default()).unwrap();
        synthesize(&p, mode, &SynthSettings::default()).unwrap()
    }

    #[test]
    fn xor_assign_is_one_cnot() {
        for mode in [SynthesisMode::CostAware, SynthesisMode::LineAware] {
            let r = synth("module main(inout a(1), in b(1)) a ^= b", mode);
            assert_eq!(r.circuit.line_count(), 2);
            assert_eq!(r.circuit.gates(), &[Gate::cnot(1, 0)]);
        }
    }

    #[test]
    fn alu_line_counts() {
        let c = synth(crate::ALU_SOURCE, SynthesisMode::CostAware);
        assert_eq!((c.stats.line_count, c.stats.constant_line_count), (11, 4));
        let l = synth(crate::ALU_SOURCE, SynthesisMode::LineAware);
        assert_eq!((l.stats.line_count, l.stats.constant_line_count), (7, 0));
        assert!(c.stats.gate_count < l.stats.gate_count);
        assert!(c.stats.quantum_cost < l.stats.quantum_cost);
    }

    #[test]
    fn embed_examples() {
        let r = synth("module main(inout a(1), in b(1)) a ^= b", SynthesisMode::LineAware);
        let s: SignalState = [("a", 1), ("b", 0)].into_iter().collect();
        let w = embed_inputs(&r.binding, &s, 2).unwrap();
        assert_eq!(w.low_u64(), 0b01);
        assert_eq!(extract_outputs(&r.binding, &w), s);
        let missing: SignalState = [("a", 1)].into_iter().collect();
        assert_eq!(
            embed_inputs(&r.binding, &missing, 2).unwrap_err().to_string(),
            "unassigned input b"
        );
    }

    #[test]
    fn mode_names() {
        assert_eq!("cost-aware".parse::<SynthesisMode>().unwrap(), SynthesisMode::CostAware);
        assert_eq!(SynthesisMode::LineAware.to_string(), "line-aware");
        assert!("fast".parse::<SynthesisMode>().is_err());
    }
}
