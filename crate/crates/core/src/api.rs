//! Request handling shared by the command line and the HTTP service.
//!
//! Everything here is plain data in, plain data out: the service wraps
//! these functions in JSON envelopes, the CLI prints their results.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::CircuitStats;
use crate::frontend::{compile, Diagnostic, Diagnostics, ElabSettings, ElaboratedProgram, Severity};
use crate::interp::{interpret, SignalState};
use crate::real::emit_real;
use crate::synth::{simulate_program, synthesize, SynthSettings, SynthesisMode, SynthesisResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Sources above this many bytes are refused.
pub const MAX_SOURCE_BYTES: usize = 1 << 20;

/// The published schema every service response validates against.
pub const RESPONSE_SCHEMA: &str = include_str!("../schema/api-response.schema.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticReport {
    pub severity: Severity,
    pub message: String,
    pub line: u32,
    pub column: u32,
    pub end_line: u32,
    pub end_column: u32,
}

impl From<&Diagnostic> for DiagnosticReport {
    fn from(d: &Diagnostic) -> Self {
        Self {
            severity: d.severity,
            message: d.message.clone(),
            line: d.span.start.line,
            column: d.span.start.column,
            end_line: d.span.end.line,
            end_column: d.span.end.column,
        }
    }
}

/// Why a request could not be served. Always the caller's fault.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ApiError {
    /// The source did not compile.
    Source(Diagnostics),
    /// Anything else wrong with the request: bad inputs, size, budget.
    Request(String),
    TooLarge,
}

impl ApiError {
    pub fn diagnostics(&self) -> Vec<DiagnosticReport> {
        match self {
            ApiError::Source(d) => d.iter().map(DiagnosticReport::from).collect(),
            ApiError::Request(msg) => vec![request_diagnostic(msg)],
            ApiError::TooLarge => vec![request_diagnostic(&format!(
                "source exceeds the limit of {MAX_SOURCE_BYTES} bytes"
            ))],
        }
    }
}

fn request_diagnostic(msg: &str) -> DiagnosticReport {
    DiagnosticReport {
        severity: Severity::Error,
        message: msg.to_string(),
        line: 0,
        column: 0,
        end_line: 0,
        end_column: 0,
    }
}

fn default_mode() -> SynthesisMode {
    SynthesisMode::LineAware
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SourceRequest {
    pub source: String,
    #[serde(default = "default_mode")]
    pub mode: SynthesisMode,
    /// Width of signals declared without one.
    #[serde(default)]
    pub default_width: Option<u32>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SimulateRequest {
    pub source: String,
    #[serde(default = "default_mode")]
    pub mode: SynthesisMode,
    #[serde(default)]
    pub default_width: Option<u32>,
    #[serde(default)]
    pub inputs: BTreeMap<String, u64>,
    /// Also run the interpreter and report both results.
    #[serde(default)]
    pub oracle: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StatsReport {
    pub program: String,
    pub mode: SynthesisMode,
    pub lines: usize,
    pub constants: usize,
    pub garbage: usize,
    pub gates: usize,
    pub quantum_cost: u64,
}

impl StatsReport {
    pub fn new(program: &str, mode: SynthesisMode, s: &CircuitStats) -> Self {
        Self {
            program: program.to_string(),
            mode,
            lines: s.line_count,
            constants: s.constant_line_count,
            garbage: s.garbage_count,
            gates: s.gate_count,
            quantum_cost: s.quantum_cost,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LineReport {
    pub index: usize,
    pub label: String,
    pub input: Option<String>,
    pub output: Option<String>,
    pub constant: bool,
    pub garbage: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GateReport {
    pub kind: crate::circuit::GateKind,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CircuitReport {
    pub stats: StatsReport,
    pub real: String,
    pub lines: Vec<LineReport>,
    pub gates: Vec<GateReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ParseReport {
    pub modules: Vec<String>,
    pub entry: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimulateReport {
    pub mode: SynthesisMode,
    pub outputs: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CostReport {
    pub stats: StatsReport,
    pub helper_lines: usize,
}

fn settings(default_width: Option<u32>) -> ElabSettings {
    let mut s = ElabSettings::default();
    if let Some(w) = default_width {
        s.default_width = w;
    }
    s
}

pub fn compile_source(source: &str, default_width: Option<u32>) -> Result<ElaboratedProgram, ApiError> {
    if source.len() > MAX_SOURCE_BYTES {
        return Err(ApiError::TooLarge);
    }
    if default_width.is_some_and(|w| w == 0 || w > 64) {
        return Err(ApiError::Request("default width must be between 1 and 64".into()));
    }
    compile(source, &settings(default_width)).map_err(ApiError::Source)
}

pub fn synthesize_source(source: &str, mode: SynthesisMode, default_width: Option<u32>) -> Result<SynthesisResult, ApiError> {
    let p = compile_source(source, default_width)?;
    synthesize(&p, mode, &SynthSettings::default()).map_err(|e| ApiError::Request(e.to_string()))
}

pub fn parse(req: &SourceRequest) -> Result<ParseReport, ApiError> {
    let p = compile_source(&req.source, req.default_width)?;
    Ok(ParseReport {
        modules: p.program().modules.iter().map(|m| m.name.clone()).collect(),
        entry: p.entry().name.clone(),
    })
}

pub fn circuit_report(r: &SynthesisResult) -> CircuitReport {
    CircuitReport {
        stats: StatsReport::new(&r.program, r.mode, &r.stats),
        real: emit_real(&r.circuit),
        lines: r
            .circuit
            .lines()
            .iter()
            .enumerate()
            .map(|(index, l)| LineReport {
                index,
                label: l.label.clone(),
                input: l.input.clone(),
                output: l.output.clone(),
                constant: l.constant,
                garbage: l.garbage,
            })
            .collect(),
        gates: r
            .circuit
            .gates()
            .iter()
            .map(|g| GateReport {
                kind: g.kind,
                controls: g.controls.clone(),
                targets: g.targets.clone(),
            })
            .collect(),
    }
}

pub fn synthesize_request(req: &SourceRequest) -> Result<CircuitReport, ApiError> {
    Ok(circuit_report(&synthesize_source(&req.source, req.mode, req.default_width)?))
}

pub fn cost(req: &SourceRequest) -> Result<CostReport, ApiError> {
    let r = synthesize_source(&req.source, req.mode, req.default_width)?;
    Ok(CostReport {
        stats: StatsReport::new(&r.program, r.mode, &r.stats),
        helper_lines: r.helper_lines,
    })
}

/// Output signals (`out`, `inout`, `state`) of a final state.
fn outputs(p: &ElaboratedProgram, s: &SignalState) -> BTreeMap<String, u64> {
    p.entry()
        .signals()
        .filter(|sig| sig.kind.is_output())
        .filter_map(|sig| s.get(sig.name).map(|v| (sig.name.to_string(), v)))
        .collect()
}

/// Runs the synthesized circuit on `inputs`.
pub fn simulate(req: &SimulateRequest) -> Result<SimulateReport, ApiError> {
    let p = compile_source(&req.source, req.default_width)?;
    let r = synthesize(&p, req.mode, &SynthSettings::default()).map_err(|e| ApiError::Request(e.to_string()))?;
    let inputs: SignalState = req.inputs.iter().map(|(k, v)| (k.clone(), *v)).collect();
    let got = simulate_program(&r, &inputs).map_err(|e| ApiError::Request(e.to_string()))?;
    let outputs = outputs(&p, &got);
    let (oracle, agrees) = if req.oracle {
        // The interpreter only accepts primary inputs; `out` signals start at 0.
        let primary: SignalState = inputs
            .iter()
            .filter(|(n, _)| p.entry().signal(n).is_some_and(|s| s.kind.is_primary_input()))
            .collect();
        let want = interpret(&p, &primary).map_err(|e| ApiError::Request(e.to_string()))?;
        let want = self::outputs(&p, &want.final_state);
        let agrees = want == outputs;
        (Some(want), Some(agrees))
    } else {
        (None, None)
    };
    Ok(SimulateReport {
        mode: req.mode,
        outputs,
        oracle,
        agrees,
    })
}
