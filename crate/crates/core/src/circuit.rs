//! Reversible circuit representation: labelled lines and an ordered list
//! of multiple-controlled Toffoli and Fredkin gates.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Largest line count for which full truth tables are enumerated.
pub const MAX_ENUM_LINES: usize = 20;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Line {
    pub label: String,
    /// Starts at 0 regardless of the environment.
    pub constant: bool,
    /// Final value carries no meaning.
    pub garbage: bool,
    pub input: Option<String>,
    pub output: Option<String>,
}

impl Line {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    /// A zero-initialized ancilla line.
    pub fn constant(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            constant: true,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    /// Flips its target when all controls are 1.
    Mct,
    /// Swaps its two targets when all controls are 1.
    Mcf,
}

/// A gate with positive controls. Controls are kept sorted and free of
/// duplicates; Fredkin targets are sorted as well.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Gate {
    pub kind: GateKind,
    pub controls: Vec<usize>,
    pub targets: Vec<usize>,
}

fn normalize(controls: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut c: Vec<usize> = controls.into_iter().collect();
    c.sort_unstable();
    c.dedup();
    c
}

impl Gate {
    pub fn mct(controls: impl IntoIterator<Item = usize>, target: usize) -> Self {
        Self {
            kind: GateKind::Mct,
            controls: normalize(controls),
            targets: vec![target],
        }
    }

    pub fn mcf(controls: impl IntoIterator<Item = usize>, a: usize, b: usize) -> Self {
        Self {
            kind: GateKind::Mcf,
            controls: normalize(controls),
            targets: vec![a.min(b), a.max(b)],
        }
    }

    pub fn not(target: usize) -> Self {
        Self::mct([], target)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::mct([control], target)
    }

    pub fn toffoli(c0: usize, c1: usize, target: usize) -> Self {
        Self::mct([c0, c1], target)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::mcf([], a, b)
    }

    /// Returns the gate with `extra` added to its controls.
    pub fn controlled_by(mut self, extra: impl IntoIterator<Item = usize>) -> Self {
        self.controls.extend(extra);
        self.controls = normalize(std::mem::take(&mut self.controls));
        self
    }

    /// Every line the gate touches.
    pub fn lines(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(&self.targets).copied()
    }

    pub fn validate(&self, line_count: usize) -> Result<(), CircuitError> {
        if let Some(line) = self.lines().find(|&l| l >= line_count) {
            return Err(CircuitError::LineOutOfRange {
                line,
                lines: line_count,
            });
        }
        let expected = match self.kind {
            GateKind::Mct => 1,
            GateKind::Mcf => 2,
        };
        if self.targets.len() != expected {
            return Err(CircuitError::TargetCount {
                kind: self.kind,
                found: self.targets.len(),
            });
        }
        if self.kind == GateKind::Mcf && self.targets[0] == self.targets[1] {
            return Err(CircuitError::DuplicateTarget(self.targets[0]));
        }
        if let Some(&t) = self.targets.iter().find(|t| self.controls.contains(t)) {
            return Err(CircuitError::ControlEqualsTarget(t));
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            GateKind::Mct => "MCT",
            GateKind::Mcf => "MCF",
        };
        write!(f, "{name}({:?} -> {:?})", self.controls, self.targets)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("control equals target (line {0})")]
    ControlEqualsTarget(usize),
    #[error("line {line} out of range for a circuit of {lines} lines")]
    LineOutOfRange { line: usize, lines: usize },
    #[error("fredkin gate targets line {0} twice")]
    DuplicateTarget(usize),
    #[error("{kind:?} gate needs a different number of targets, found {found}")]
    TargetCount { kind: GateKind, found: usize },
    #[error("{lines} lines exceed the enumeration limit of {limit}")]
    TooManyLines { lines: usize, limit: usize },
    #[error("circuits have different line counts ({0} vs {1})")]
    LineCountMismatch(usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Circuit {
    lines: Vec<Line>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Circuit with `n` plain lines labelled `0..n`.
    pub fn with_lines(n: usize) -> Self {
        Self {
            lines: (0..n).map(|i| Line::new(i.to_string())).collect(),
            gates: Vec::new(),
        }
    }

    pub fn from_parts(lines: Vec<Line>, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        let mut c = Self { lines, gates: Vec::new() };
        for g in gates {
            c.append_gate(g)?;
        }
        Ok(c)
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn line(&self, index: usize) -> &Line {
        &self.lines[index]
    }

    pub fn line_mut(&mut self, index: usize) -> &mut Line {
        &mut self.lines[index]
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Appends a line and returns its index.
    pub fn add_line(&mut self, line: Line) -> usize {
        self.lines.push(line);
        self.lines.len() - 1
    }

    /// Appends `gate` after checking it against the current line count.
    pub fn append_gate(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.validate(self.lines.len())?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends all gates of `other`, which must have the same line count.
    pub fn append_circuit(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        if other.line_count() != self.line_count() {
            return Err(CircuitError::LineCountMismatch(self.line_count(), other.line_count()));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Re-appends the gates from `start` to `end` in reverse order.
    pub(crate) fn replay_reversed(&mut self, start: usize, end: usize) {
        let rev: Vec<Gate> = self.gates[start..end].iter().rev().cloned().collect();
        self.gates.extend(rev);
    }

    /// Reverses the order of the gates emitted since `start`.
    pub(crate) fn reverse_tail(&mut self, start: usize) {
        self.gates[start..].reverse();
    }

    /// Lines targeted by at least one gate.
    pub fn targeted_lines(&self) -> Vec<bool> {
        let mut hit = vec![false; self.lines.len()];
        for g in &self.gates {
            for &t in &g.targets {
                hit[t] = true;
            }
        }
        hit
    }
}

/// The inverse circuit: same lines, gates in reverse order. Every MCT and
/// MCF gate is its own inverse.
pub fn reverse_circuit(circuit: &Circuit) -> Circuit {
    Circuit {
        lines: circuit.lines.clone(),
        gates: circuit.gates.iter().rev().cloned().collect(),
    }
}

/// Output word for every input word `0..2^n`, line `i` being bit `i`.
pub fn permutation(circuit: &Circuit) -> Result<Vec<u64>, CircuitError> {
    crate::sim::truth_table(circuit)
}

/// Per-gate cost table.
pub trait CostModel {
    fn mct_cost(&self, controls: usize) -> u64;
    fn mcf_cost(&self, controls: usize) -> u64;

    fn gate_cost(&self, gate: &Gate) -> u64 {
        match gate.kind {
            GateKind::Mct => self.mct_cost(gate.controls.len()),
            GateKind::Mcf => self.mcf_cost(gate.controls.len()),
        }
    }
}

/// Quantum cost as commonly tabulated for MCT gates: 1 for NOT and CNOT,
/// 5 for Toffoli, `2^(c+1) - 3` beyond. A Fredkin gate costs a Toffoli with
/// one more control plus two CNOTs.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuantumCost;

impl CostModel for QuantumCost {
    fn mct_cost(&self, controls: usize) -> u64 {
        match controls {
            0 | 1 => 1,
            2 => 5,
            c if c + 1 >= 64 => u64::MAX,
            c => (1u64 << (c + 1)) - 3,
        }
    }

    fn mcf_cost(&self, controls: usize) -> u64 {
        self.mct_cost(controls + 1).saturating_add(2)
    }
}

/// Every gate costs 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitCost;

impl CostModel for UnitCost {
    fn mct_cost(&self, _: usize) -> u64 {
        1
    }

    fn mcf_cost(&self, _: usize) -> u64 {
        1
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct CircuitStats {
    pub line_count: usize,
    pub constant_line_count: usize,
    pub garbage_count: usize,
    pub gate_count: usize,
    pub quantum_cost: u64,
}

pub fn statistics(circuit: &Circuit, model: &dyn CostModel) -> CircuitStats {
    CircuitStats {
        line_count: circuit.line_count(),
        constant_line_count: circuit.lines.iter().filter(|l| l.constant).count(),
        garbage_count: circuit.lines.iter().filter(|l| l.garbage).count(),
        gate_count: circuit.gate_count(),
        quantum_cost: circuit
            .gates
            .iter()
            .fold(0u64, |acc, g| acc.saturating_add(model.gate_cost(g))),
    }
}
