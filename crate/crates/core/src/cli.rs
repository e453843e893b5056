//! The `syrec` command line.
//!
//! Exit codes: 0 on success, 1 on diagnostics, missing inputs or failed
//! checks, 2 on I/O errors.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::api::{self, ApiError, SimulateRequest, StatsReport};
use crate::frontend::{mask, ElaboratedProgram};
use crate::interp::{interpret, SignalState};
use crate::real::{emit_real, emit_stats};
use crate::sim::check_reversible;
use crate::synth::{simulate_program, synthesize, SynthSettings, SynthesisMode};

#[derive(Debug, Parser)]
#[command(name = "syrec", version, about = "Compile SyReC programs to reversible circuits")]
pub struct Cli {
    /// Width of signals declared without an explicit width.
    #[arg(long, global = true, value_name = "BITS")]
    pub width: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a program; writes the `.real` circuit and prints statistics as JSON.
    Synth {
        file: PathBuf,
        #[arg(long, default_value = "line-aware")]
        mode: SynthesisMode,
        /// Where to write the circuit, `-` for standard output.
        /// Defaults to the input path with a `.real` extension.
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
        /// Also write the statistics JSON to this file.
        #[arg(long, value_name = "PATH")]
        stats: Option<PathBuf>,
    },
    /// Simulate the synthesized circuit and print output signals.
    Sim {
        file: PathBuf,
        #[arg(long, default_value = "line-aware")]
        mode: SynthesisMode,
        /// Initial value of a signal, repeatable.
        #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_assignment)]
        set: Vec<(String, u64)>,
        /// Also run the interpreter and fail if the results differ.
        #[arg(long)]
        oracle: bool,
    },
    /// Print line, gate and quantum cost figures.
    Cost {
        file: PathBuf,
        /// Only this mode; both when omitted.
        #[arg(long)]
        mode: Option<SynthesisMode>,
        /// One JSON object per line instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Check circuits of both modes against the interpreter and for reversibility.
    Check {
        file: PathBuf,
        /// Seed for sampled inputs.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sampled inputs when exhaustive checking is too large.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Run the HTTP service.
    #[cfg(feature = "service")]
    Serve {
        /// Port to listen on; `SYREC_PORT` when omitted, else 8080.
        #[arg(long)]
        port: Option<u16>,
        /// Directory with playground assets served at `/`.
        #[arg(long = "static", value_name = "DIR")]
        static_dir: Option<PathBuf>,
    },
}

fn parse_assignment(s: &str) -> Result<(String, u64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    let value = value.trim();
    let v = if let Some(hex) = value.strip_prefix("0x") {
        u64::from_str_radix(hex, 16)
    } else if let Some(bin) = value.strip_prefix("0b") {
        u64::from_str_radix(bin, 2)
    } else {
        value.parse()
    };
    Ok((name.trim().to_string(), v.map_err(|e| format!("bad value '{value}': {e}"))?))
}

/// A reason to stop, already rendered for the user.
enum Failure {
    User(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::User(_) => 1,
            Failure::Io(_) => 2,
        }
    }
}

type Outcome = Result<(), Failure>;

/// Parses the process arguments and runs the command.
pub fn main() -> ExitCode {
    run(Cli::parse())
}

pub fn run(cli: Cli) -> ExitCode {
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::User(msg) | Failure::Io(msg)) = &f;
            if !msg.is_empty() {
                eprint!("{msg}");
                if !msg.ends_with('\n') {
                    eprintln!();
                }
            }
            ExitCode::from(f.code())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn api_failure(path: &Path, e: ApiError) -> Failure {
    match e {
        ApiError::Source(d) => Failure::User(d.render(&path.display().to_string())),
        ApiError::TooLarge => Failure::User(format!("{}: source is larger than {} bytes", path.display(), api::MAX_SOURCE_BYTES)),
        ApiError::Request(m) => Failure::User(format!("{}: {m}", path.display())),
    }
}

fn compile(path: &Path, width: Option<u32>) -> Result<ElaboratedProgram, Failure> {
    let source = read(path)?;
    api::compile_source(&source, width).map_err(|e| api_failure(path, e))
}

fn synth_program(path: &Path, p: &ElaboratedProgram, mode: SynthesisMode) -> Result<crate::SynthesisResult, Failure> {
    synthesize(p, mode, &SynthSettings::default()).map_err(|e| Failure::User(format!("{}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Synth {
            file,
            mode,
            output,
            stats,
        } => {
            let p = compile(file, cli.width)?;
            let r = synth_program(file, &p, *mode)?;
            let real = emit_real(&r.circuit);
            let json = emit_stats(&r.stats, mode.as_str(), &r.program);
            match output.as_deref() {
                Some(o) if o == Path::new("-") => print!("{real}"),
                Some(o) => write(o, &real)?,
                None => write(&file.with_extension("real"), &real)?,
            }
            if let Some(s) = stats {
                write(s, &format!("{json}\n"))?;
            }
            println!("{json}");
            Ok(())
        }
        Command::Sim { file, mode, set, oracle } => {
            let source = read(file)?;
            let req = SimulateRequest {
                source,
                mode: *mode,
                default_width: cli.width,
                inputs: set.iter().cloned().collect(),
                oracle: *oracle,
            };
            let rep = api::simulate(&req).map_err(|e| api_failure(file, e))?;
            for (name, v) in &rep.outputs {
                println!("{name}={v}");
            }
            if rep.agrees == Some(false) {
                let mut msg = String::from("circuit and interpreter disagree; interpreter gives:\n");
                for (name, v) in rep.oracle.iter().flatten() {
                    let _ = writeln!(msg, "{name}={v}");
                }
                return Err(Failure::User(msg));
            }
            Ok(())
        }
        Command::Cost { file, mode, json } => {
            let p = compile(file, cli.width)?;
            let modes = match mode {
                Some(m) => vec![*m],
                None => vec![SynthesisMode::CostAware, SynthesisMode::LineAware],
            };
            let mut rows = Vec::new();
            for m in modes {
                let r = synth_program(file, &p, m)?;
                rows.push((StatsReport::new(&r.program, m, &r.stats), r.helper_lines));
            }
            if *json {
                for (s, _) in &rows {
                    println!("{}", serde_json::to_string(s).expect("stats serialize"));
                }
            } else {
                print!("{}", cost_table(&rows));
            }
            Ok(())
        }
        Command::Check { file, seed, samples } => {
            let p = compile(file, cli.width)?;
            check(file, &p, *seed, *samples)
        }
        #[cfg(feature = "service")]
        Command::Serve { port, static_dir } => {
            let port = match port {
                Some(p) => *p,
                None => match std::env::var("SYREC_PORT") {
                    Ok(v) => v
                        .parse()
                        .map_err(|_| Failure::User(format!("SYREC_PORT is not a port number: {v}")))?,
                    Err(_) => crate::service::DEFAULT_PORT,
                },
            };
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
            rt.block_on(crate::service::serve(port, static_dir.clone()))
                .map_err(|e| Failure::Io(format!("port {port}: {e}")))
        }
    }
}

fn cost_table(rows: &[(StatsReport, usize)]) -> String {
    let mut out = format!(
        "{:<12} {:>6} {:>10} {:>8} {:>6} {:>13}\n",
        "mode", "lines", "constants", "garbage", "gates", "quantum cost"
    );
    for (s, _) in rows {
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>10} {:>8} {:>6} {:>13}",
            s.mode.as_str(),
            s.lines,
            s.constants,
            s.garbage,
            s.gates,
            s.quantum_cost
        );
    }
    out
}

/// Inputs are enumerated exhaustively up to this many bits.
const EXHAUSTIVE_BITS: u32 = 12;

fn check(path: &Path, p: &ElaboratedProgram, seed: u64, samples: usize) -> Outcome {
    let inputs: Vec<(String, u32)> = p
        .entry()
        .signals()
        .filter(|s| s.kind.is_primary_input())
        .map(|s| (s.name.to_string(), s.width.expect("elaborated width")))
        .collect();
    let outputs: Vec<&str> = p.entry().signals().filter(|s| s.kind.is_output()).map(|s| s.name).collect();
    let bits: u32 = inputs.iter().map(|(_, w)| w).sum();
    let states: Vec<SignalState> = if bits <= EXHAUSTIVE_BITS {
        (0..1u64 << bits)
            .map(|word| {
                let mut shift = 0;
                inputs
                    .iter()
                    .map(|(n, w)| {
                        let v = word >> shift & mask(*w);
                        shift += w;
                        (n.clone(), v)
                    })
                    .collect()
            })
            .collect()
    } else {
        let mut rng = StdRng::seed_from_u64(seed);
        (0..samples)
            .map(|_| inputs.iter().map(|(n, w)| (n.clone(), rng.gen::<u64>() & mask(*w))).collect())
            .collect()
    };

    let mut failed = false;
    for mode in [SynthesisMode::CostAware, SynthesisMode::LineAware] {
        let r = synth_program(path, p, mode)?;
        let mut mismatches = 0usize;
        let mut first = None;
        for s in &states {
            let want = match interpret(p, s) {
                Ok(w) => w.final_state.select(outputs.iter().copied()),
                Err(e) => return Err(Failure::User(format!("{}: {e} (inputs {s})", path.display()))),
            };
            let got = simulate_program(&r, s)
                .map_err(|e| Failure::User(e.to_string()))?
                .select(outputs.iter().copied());
            if got != want {
                mismatches += 1;
                first.get_or_insert_with(|| format!("on {s}: circuit {got}, interpreter {want}"));
            }
        }
        let reversible = match check_reversible(&r.circuit) {
            Ok(None) => "bijective".to_string(),
            Ok(Some(c)) => {
                failed = true;
                format!("NOT bijective ({:#x} and {:#x} both map to {:#x})", c.first, c.second, c.output)
            }
            Err(_) => "too wide to enumerate".to_string(),
        };
        let how = if bits <= EXHAUSTIVE_BITS { "exhaustive" } else { "sampled" };
        if mismatches == 0 {
            println!("{mode}: {} {how} inputs agree, {reversible}", states.len());
        } else {
            failed = true;
            println!(
                "{mode}: {mismatches} of {} {how} inputs disagree, first {}, {reversible}",
                states.len(),
                first.unwrap_or_default()
            );
        }
    }
    if failed {
        Err(Failure::User(String::new()))
    } else {
        Ok(())
    }
}
