//! Bit-level simulation of circuits.
//!
//! States of up to 64 lines are packed into a `u64`; wider circuits use
//! [`BitWord`]. Line `i` is bit `i` in either representation.

use rayon::prelude::*;

use crate::circuit::{Circuit, CircuitError, Gate, GateKind, MAX_ENUM_LINES};

/// Arbitrary-width bit vector.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitWord(pub Vec<u64>);

impl BitWord {
    pub fn zeros(bits: usize) -> Self {
        Self(vec![0; bits.div_ceil(64).max(1)])
    }

    pub fn from_u64(value: u64, bits: usize) -> Self {
        let mut w = Self::zeros(bits);
        w.0[0] = value;
        w
    }

    pub fn get(&self, i: usize) -> bool {
        self.0.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let (w, b) = (i / 64, i % 64);
        if w >= self.0.len() {
            self.0.resize(w + 1, 0);
        }
        if v {
            self.0[w] |= 1 << b;
        } else {
            self.0[w] &= !(1 << b);
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn low_u64(&self) -> u64 {
        self.0[0]
    }
}

#[inline]
fn mask_of(lines: &[usize]) -> u64 {
    lines.iter().fold(0, |m, &l| m | 1 << l)
}

/// Applies one gate to a packed state. All lines must be below 64.
#[inline]
pub fn apply_gate(gate: &Gate, state: u64) -> u64 {
    let cm = mask_of(&gate.controls);
    if state & cm != cm {
        return state;
    }
    match gate.kind {
        GateKind::Mct => state ^ 1 << gate.targets[0],
        GateKind::Mcf => {
            let (a, b) = (gate.targets[0], gate.targets[1]);
            if (state >> a ^ state >> b) & 1 == 1 {
                state ^ (1 << a | 1 << b)
            } else {
                state
            }
        }
    }
}

pub fn apply_gate_wide(gate: &Gate, state: &mut BitWord) {
    if !gate.controls.iter().all(|&c| state.get(c)) {
        return;
    }
    match gate.kind {
        GateKind::Mct => state.flip(gate.targets[0]),
        GateKind::Mcf => {
            let (a, b) = (gate.targets[0], gate.targets[1]);
            let (va, vb) = (state.get(a), state.get(b));
            state.set(a, vb);
            state.set(b, va);
        }
    }
}

/// Runs a circuit of at most 64 lines on a packed input.
pub fn run(circuit: &Circuit, input: u64) -> u64 {
    assert!(circuit.line_count() <= 64, "packed simulation needs at most 64 lines");
    circuit.gates().iter().fold(input, |s, g| apply_gate(g, s))
}

pub fn run_wide(circuit: &Circuit, input: &BitWord) -> BitWord {
    let mut s = input.clone();
    for g in circuit.gates() {
        apply_gate_wide(g, &mut s);
    }
    s
}

/// Output for every input `0..2^n`, computed in parallel.
pub fn truth_table(circuit: &Circuit) -> Result<Vec<u64>, CircuitError> {
    let n = circuit.line_count();
    if n > MAX_ENUM_LINES {
        return Err(CircuitError::TooManyLines {
            lines: n,
            limit: MAX_ENUM_LINES,
        });
    }
    Ok((0..1u64 << n)
        .into_par_iter()
        .map(|x| run(circuit, x))
        .collect())
}

/// Two distinct inputs mapped to the same output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Collision {
    pub first: u64,
    pub second: u64,
    pub output: u64,
}

/// Checks that the circuit computes a bijection on its full state space.
/// Returns a collision witness if it does not.
pub fn check_reversible(circuit: &Circuit) -> Result<Option<Collision>, CircuitError> {
    let table = truth_table(circuit)?;
    let mut seen: Vec<Option<u64>> = vec![None; table.len()];
    for (x, &y) in table.iter().enumerate() {
        let slot = &mut seen[y as usize];
        if let Some(first) = *slot {
            return Ok(Some(Collision {
                first,
                second: x as u64,
                output: y,
            }));
        }
        *slot = Some(x as u64);
    }
    Ok(None)
}

fn bits(value: u64, n: usize) -> String {
    (0..n).rev().map(|i| if value >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// One `input -> output` row per input, line 0 rightmost.
pub fn truth_table_text(circuit: &Circuit) -> Result<String, CircuitError> {
    let n = circuit.line_count();
    let mut out = String::new();
    for (x, y) in truth_table(circuit)?.into_iter().enumerate() {
        out.push_str(&bits(x as u64, n));
        out.push_str(" -> ");
        out.push_str(&bits(y, n));
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_semantics() {
        assert_eq!(apply_gate(&Gate::cnot(0, 1), 0b01), 0b11);
        assert_eq!(apply_gate(&Gate::toffoli(0, 1, 2), 0b011), 0b111);
        assert_eq!(apply_gate(&Gate::toffoli(0, 1, 2), 0b001), 0b001);
        assert_eq!(apply_gate(&Gate::mcf([0], 1, 2), 0b011), 0b101);
        assert_eq!(apply_gate(&Gate::mcf([0], 1, 2), 0b010), 0b010);
        assert_eq!(apply_gate(&Gate::not(3), 0), 0b1000);
    }

    #[test]
    fn wide_matches_packed() {
        let mut c = Circuit::with_lines(3);
        c.append_gate(Gate::not(0)).unwrap();
        c.append_gate(Gate::toffoli(0, 1, 2)).unwrap();
        c.append_gate(Gate::mcf([2], 0, 1)).unwrap();
        for x in 0..8 {
            assert_eq!(run_wide(&c, &BitWord::from_u64(x, 3)).low_u64(), run(&c, x));
        }
        let mut w = Circuit::with_lines(70);
        w.append_gate(Gate::cnot(0, 69)).unwrap();
        let mut s = BitWord::zeros(70);
        s.set(0, true);
        assert!(run_wide(&w, &s).get(69));
    }

    #[test]
    fn permutation_and_text() {
        let mut c = Circuit::with_lines(2);
        c.append_gate(Gate::cnot(0, 1)).unwrap();
        assert_eq!(truth_table(&c).unwrap(), vec![0, 3, 2, 1]);
        assert_eq!(
            truth_table_text(&c).unwrap(),
            "00 -> 00\n01 -> 11\n10 -> 10\n11 -> 01\n"
        );
        assert_eq!(check_reversible(&c).unwrap(), None);
        assert!(matches!(
            truth_table(&Circuit::with_lines(21)),
            Err(CircuitError::TooManyLines { .. })
        ));
    }
}
