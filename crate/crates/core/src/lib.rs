//! SyReC compiler: parsing, checking, an interpreter, two synthesis
//! strategies for reversible circuits, a simulator, and `.real` I/O.
//!
//! ```
//! use syrec::{compile, synthesize, ElabSettings, SynthSettings, SynthesisMode};
//!
//! let program = compile(syrec::ALU_SOURCE, &ElabSettings::default()).unwrap();
//! let result = synthesize(&program, SynthesisMode::LineAware, &SynthSettings::default()).unwrap();
//! assert_eq!(result.stats.line_count, 7);
//! ```

pub mod api;
pub mod circuit;
pub mod cli;
pub mod frontend;
pub mod gates;
pub mod interp;
pub mod real;
#[cfg(feature = "service")]
pub mod service;
pub mod sim;
pub mod synth;

pub use circuit::{reverse_circuit, statistics, Circuit, CircuitStats, CostModel, Gate, GateKind, Line, QuantumCost, UnitCost};
pub use frontend::{compile, Diagnostics, ElabSettings, ElaboratedProgram};
pub use interp::{execute, interpret, invert_statements, SignalState};
pub use real::{emit_real, emit_stats, parse_real};
pub use synth::{embed_inputs, extract_outputs, synthesize, SynthSettings, SynthesisMode, SynthesisResult};

/// The 2-bit ALU: `op = 1` adds, `op = 0` subtracts.
pub const ALU_SOURCE: &str = "module alu(in op(1), out x0(2), in x1(2), in x2(2))
  if (op = 1) then
    x0 ^= (x1 + x2)
  else
    x0 ^= (x1 - x2)
  fi (op = 1)
";
