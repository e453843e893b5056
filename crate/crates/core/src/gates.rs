//! Reversible building blocks.
//!
//! Every block emits its gates under a [`ControlContext`]: the context lines
//! are added as controls to each gate that changes a target, so the block
//! does nothing unless all context lines are 1. Compute/uncompute pairs
//! inside a block are emitted without the context since they cancel anyway.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate, Line};
use crate::frontend::BinOp;

/// A single operand bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bit {
    Line(usize),
    Zero,
    One,
}

/// Source of a block: circuit lines, a constant, or a mix of both as
/// produced by constant shifts. Bits are LSB first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Lines(Vec<usize>),
    Const { value: u64, width: u32 },
    Bits(Vec<Bit>),
}

impl Operand {
    pub fn width(&self) -> usize {
        match self {
            Operand::Lines(l) => l.len(),
            Operand::Const { width, .. } => *width as usize,
            Operand::Bits(b) => b.len(),
        }
    }

    pub fn bits(&self) -> Vec<Bit> {
        match self {
            Operand::Lines(l) => l.iter().map(|&l| Bit::Line(l)).collect(),
            Operand::Const { value, width } => (0..*width)
                .map(|i| if i < 64 && value >> i & 1 == 1 { Bit::One } else { Bit::Zero })
                .collect(),
            Operand::Bits(b) => b.clone(),
        }
    }

    /// Lines read by the operand.
    pub fn lines(&self) -> Vec<usize> {
        self.bits()
            .into_iter()
            .filter_map(|b| match b {
                Bit::Line(l) => Some(l),
                _ => None,
            })
            .collect()
    }

    /// The operand's lines if every bit is a line.
    pub fn as_lines(&self) -> Option<Vec<usize>> {
        self.bits()
            .into_iter()
            .map(|b| match b {
                Bit::Line(l) => Some(l),
                _ => None,
            })
            .collect()
    }

    /// Normalizes `Bits` made only of lines or only of constants.
    pub fn simplify(self) -> Self {
        match self {
            Operand::Bits(bits) => {
                if let Some(lines) = bits
                    .iter()
                    .map(|b| if let Bit::Line(l) = b { Some(*l) } else { None })
                    .collect::<Option<Vec<_>>>()
                {
                    return Operand::Lines(lines);
                }
                if bits.len() <= 64 && bits.iter().all(|b| !matches!(b, Bit::Line(_))) {
                    let value = bits
                        .iter()
                        .enumerate()
                        .fold(0u64, |v, (i, b)| if *b == Bit::One { v | 1 << i } else { v });
                    return Operand::Const {
                        value,
                        width: bits.len() as u32,
                    };
                }
                Operand::Bits(bits)
            }
            other => other,
        }
    }
}

/// Sorted set of lines conditioning every emitted gate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ControlContext {
    controls: Vec<usize>,
}

impl ControlContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_lines(lines: impl IntoIterator<Item = usize>) -> Self {
        let mut controls: Vec<usize> = lines.into_iter().collect();
        controls.sort_unstable();
        controls.dedup();
        Self { controls }
    }

    pub fn with(&self, line: usize) -> Self {
        Self::from_lines(self.controls.iter().copied().chain([line]))
    }

    pub fn lines(&self) -> &[usize] {
        &self.controls
    }

    pub fn contains(&self, line: usize) -> bool {
        self.controls.binary_search(&line).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error("width mismatch: expected {expected} bits, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("line {0} is used by more than one operand")]
    Overlap(usize),
    #[error("result line {0} is not a zero-initialized line")]
    ResultNotFresh(usize),
    #[error("operator '{0}' has no block")]
    Unsupported(&'static str),
    #[error("circuit would exceed the limit of {limit} lines")]
    LineBudget { limit: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Lines a block borrowed besides its operands.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Footprint {
    pub helpers: usize,
}

/// Supplies zero-initialized helper lines. Released lines must be back at 0.
pub trait LineAllocator {
    fn acquire(&mut self, circuit: &mut Circuit, n: usize) -> Result<Vec<usize>, BlockError>;
    fn release(&mut self, lines: &[usize]);
}

/// Allocator that reuses released lines, lowest index first, and appends
/// `const_0` lines when none are free.
#[derive(Clone, Debug)]
pub struct HelperPool {
    free: Vec<usize>,
    max_lines: usize,
    created: Vec<usize>,
}

impl HelperPool {
    pub fn new(max_lines: usize) -> Self {
        Self {
            free: Vec::new(),
            max_lines,
            created: Vec::new(),
        }
    }

    /// Lines this pool has added to the circuit.
    pub fn created_lines(&self) -> &[usize] {
        &self.created
    }

    /// Released lines available for reuse.
    pub fn free_lines(&self) -> &[usize] {
        &self.free
    }
}

impl Default for HelperPool {
    fn default() -> Self {
        Self::new(4096)
    }
}

impl LineAllocator for HelperPool {
    fn acquire(&mut self, circuit: &mut Circuit, n: usize) -> Result<Vec<usize>, BlockError> {
        let reused = n.min(self.free.len());
        let mut out: Vec<usize> = self.free.drain(..reused).collect();
        if circuit.line_count() + (n - reused) > self.max_lines {
            self.release(&out);
            return Err(BlockError::LineBudget {
                limit: self.max_lines,
            });
        }
        for _ in reused..n {
            let line = circuit.add_line(Line::constant("const_0"));
            self.created.push(line);
            out.push(line);
        }
        Ok(out)
    }

    fn release(&mut self, lines: &[usize]) {
        self.free.extend_from_slice(lines);
        self.free.sort_unstable();
        self.free.dedup();
    }
}

fn distinct(lines: &[usize]) -> Result<(), BlockError> {
    let mut seen = lines.to_vec();
    seen.sort_unstable();
    match seen.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(BlockError::Overlap(w[0])),
        None => Ok(()),
    }
}

fn disjoint(a: &[usize], b: &[usize]) -> Result<(), BlockError> {
    match a.iter().find(|l| b.contains(l)) {
        Some(&l) => Err(BlockError::Overlap(l)),
        None => Ok(()),
    }
}

fn same_width(expected: usize, found: usize) -> Result<(), BlockError> {
    if expected == found {
        Ok(())
    } else {
        Err(BlockError::WidthMismatch { expected, found })
    }
}

/// Checks that `target` may be written while reading `source` under `ctx`.
fn check_target(ctx: &ControlContext, target: &[usize], source: &[usize]) -> Result<(), BlockError> {
    distinct(target)?;
    disjoint(target, ctx.lines())?;
    disjoint(target, source)
}

fn emit(c: &mut Circuit, ctx: &ControlContext, gate: Gate) -> Result<(), BlockError> {
    c.append_gate(gate.controlled_by(ctx.lines().iter().copied()))?;
    Ok(())
}

/// `target ^= bit` under `ctx`.
fn xor_bit(c: &mut Circuit, ctx: &ControlContext, bit: Bit, target: usize) -> Result<(), BlockError> {
    match bit {
        Bit::Line(s) => emit(c, ctx, Gate::cnot(s, target)),
        Bit::One => emit(c, ctx, Gate::not(target)),
        Bit::Zero => Ok(()),
    }
}

/// `target ^= AND(bits)` under `ctx`.
fn xor_and(c: &mut Circuit, ctx: &ControlContext, bits: &[Bit], target: usize) -> Result<(), BlockError> {
    let mut controls = Vec::new();
    for b in bits {
        match b {
            Bit::Line(l) => controls.push(*l),
            Bit::One => {}
            Bit::Zero => return Ok(()),
        }
    }
    emit(c, ctx, Gate::mct(controls, target))
}

/// `target ^= source` bitwise.
pub fn build_xor_assign(
    c: &mut Circuit,
    ctx: &ControlContext,
    target: &[usize],
    source: &Operand,
) -> Result<(), BlockError> {
    same_width(target.len(), source.width())?;
    check_target(ctx, target, &source.lines())?;
    for (&t, b) in target.iter().zip(source.bits()) {
        xor_bit(c, ctx, b, t)?;
    }
    Ok(())
}

/// `target += addend` modulo `2^w`, using no lines besides the operands.
pub fn build_add_assign(
    c: &mut Circuit,
    ctx: &ControlContext,
    target: &[usize],
    addend: &Operand,
) -> Result<(), BlockError> {
    same_width(target.len(), addend.width())?;
    check_target(ctx, target, &addend.lines())?;
    // Adding bit i means incrementing target[i..]; the increments commute.
    for (i, b) in addend.bits().into_iter().enumerate().rev() {
        let sub = match b {
            Bit::Line(s) => ctx.with(s),
            Bit::One => ctx.clone(),
            Bit::Zero => continue,
        };
        staircase(c, &sub, &target[i..])?;
    }
    Ok(())
}

/// `target -= subtrahend`, the gate-level reverse of the adder.
pub fn build_sub_assign(
    c: &mut Circuit,
    ctx: &ControlContext,
    target: &[usize],
    subtrahend: &Operand,
) -> Result<(), BlockError> {
    let start = c.gate_count();
    build_add_assign(c, ctx, target, subtrahend)?;
    c.reverse_tail(start);
    Ok(())
}

fn staircase(c: &mut Circuit, ctx: &ControlContext, t: &[usize]) -> Result<(), BlockError> {
    for j in (1..t.len()).rev() {
        emit(c, ctx, Gate::mct(t[..j].iter().copied(), t[j]))?;
    }
    if let Some(&t0) = t.first() {
        emit(c, ctx, Gate::not(t0))?;
    }
    Ok(())
}

pub fn build_increment(c: &mut Circuit, ctx: &ControlContext, target: &[usize]) -> Result<(), BlockError> {
    check_target(ctx, target, &[])?;
    staircase(c, ctx, target)
}

pub fn build_decrement(c: &mut Circuit, ctx: &ControlContext, target: &[usize]) -> Result<(), BlockError> {
    let start = c.gate_count();
    build_increment(c, ctx, target)?;
    c.reverse_tail(start);
    Ok(())
}

/// Bitwise complement.
pub fn build_not(c: &mut Circuit, ctx: &ControlContext, target: &[usize]) -> Result<(), BlockError> {
    check_target(ctx, target, &[])?;
    for &t in target {
        emit(c, ctx, Gate::not(t))?;
    }
    Ok(())
}

pub fn build_swap(c: &mut Circuit, ctx: &ControlContext, a: &[usize], b: &[usize]) -> Result<(), BlockError> {
    same_width(a.len(), b.len())?;
    let all: Vec<usize> = a.iter().chain(b).copied().collect();
    distinct(&all)?;
    disjoint(&all, ctx.lines())?;
    for (&x, &y) in a.iter().zip(b) {
        emit(c, ctx, Gate::mcf([], x, y))?;
    }
    Ok(())
}

/// `result ^= op(left, right)` under `ctx`.
///
/// For `+` and `-` the result is a copy of `left` combined with `right`,
/// so `result` must consist of zero-initialized constant lines. All other
/// operators xor onto any target. Operand lines hold their original values
/// when the block ends.
pub fn build_binary_onto(
    c: &mut Circuit,
    ctx: &ControlContext,
    op: BinOp,
    left: &Operand,
    right: &Operand,
    result: &[usize],
    alloc: &mut dyn LineAllocator,
) -> Result<Footprint, BlockError> {
    same_width(left.width(), right.width())?;
    let expected = if op.yields_bit() { 1 } else { left.width() };
    same_width(expected, result.len())?;
    let mut reads = left.lines();
    reads.extend(right.lines());
    check_target(ctx, result, &reads)?;
    let fresh = matches!(op, BinOp::Add | BinOp::Sub);
    if let Some(&l) = result.iter().find(|&&l| fresh && !c.line(l).constant) {
        return Err(BlockError::ResultNotFresh(l));
    }

    let (lb, rb) = (left.bits(), right.bits());
    let r0 = result[0];
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Xor => {
            build_xor_assign(c, ctx, result, left)?;
            match op {
                BinOp::Add => build_add_assign(c, ctx, result, right)?,
                BinOp::Sub => build_sub_assign(c, ctx, result, right)?,
                _ => build_xor_assign(c, ctx, result, right)?,
            }
            Ok(Footprint::default())
        }
        BinOp::And | BinOp::LogicAnd => {
            for i in 0..result.len() {
                xor_and(c, ctx, &[lb[i], rb[i]], result[i])?;
            }
            Ok(Footprint::default())
        }
        BinOp::Or | BinOp::LogicOr => {
            // a | b = a ^ b ^ ab
            for i in 0..result.len() {
                xor_bit(c, ctx, lb[i], result[i])?;
                xor_bit(c, ctx, rb[i], result[i])?;
                xor_and(c, ctx, &[lb[i], rb[i]], result[i])?;
            }
            Ok(Footprint::default())
        }
        BinOp::Eq => equal_onto(c, ctx, left, right, r0, alloc),
        BinOp::Ne => {
            let fp = equal_onto(c, ctx, left, right, r0, alloc)?;
            xor_bit(c, ctx, Bit::One, r0)?;
            Ok(fp)
        }
        BinOp::Lt => less_onto(c, ctx, left, right, r0, alloc),
        BinOp::Gt => less_onto(c, ctx, right, left, r0, alloc),
        BinOp::Ge => {
            let fp = less_onto(c, ctx, left, right, r0, alloc)?;
            xor_bit(c, ctx, Bit::One, r0)?;
            Ok(fp)
        }
        BinOp::Le => {
            let fp = less_onto(c, ctx, right, left, r0, alloc)?;
            xor_bit(c, ctx, Bit::One, r0)?;
            Ok(fp)
        }
    }
}

/// Lines of `op` if it may be modified in place and restored: all bits are
/// lines, none of them is a context line or read by `other`.
fn mutable_lines(op: &Operand, other: &Operand, ctx: &ControlContext) -> Option<Vec<usize>> {
    let lines = op.as_lines()?;
    let other = other.lines();
    let ok = distinct(&lines).is_ok()
        && lines.iter().all(|l| !ctx.contains(*l) && !other.contains(l));
    ok.then_some(lines)
}

fn equal_onto(
    c: &mut Circuit,
    ctx: &ControlContext,
    left: &Operand,
    right: &Operand,
    res: usize,
    alloc: &mut dyn LineAllocator,
) -> Result<Footprint, BlockError> {
    let free = ControlContext::new();
    let (lb, rb) = (left.bits(), right.bits());
    if lb.len() == 1 {
        xor_bit(c, ctx, lb[0], res)?;
        xor_bit(c, ctx, rb[0], res)?;
        xor_bit(c, ctx, Bit::One, res)?;
        return Ok(Footprint::default());
    }
    // Turn a register into the bitwise XNOR of both operands, test for all
    // ones, then restore the register.
    let (reg, other, helpers) = if let Some(l) = mutable_lines(left, right, ctx) {
        (l, rb, Vec::new())
    } else if let Some(r) = mutable_lines(right, left, ctx) {
        (r, lb.clone(), Vec::new())
    } else {
        let h = alloc.acquire(c, lb.len())?;
        for (&t, &b) in h.iter().zip(&lb) {
            xor_bit(c, &free, b, t)?;
        }
        (h.clone(), rb, h)
    };
    let start = c.gate_count();
    for (&t, &b) in reg.iter().zip(&other) {
        xor_bit(c, &free, b, t)?;
        xor_bit(c, &free, Bit::One, t)?;
    }
    let end = c.gate_count();
    emit(c, ctx, Gate::mct(reg.iter().copied(), res))?;
    c.replay_reversed(start, end);
    release_copy(c, &lb, &helpers, alloc)?;
    Ok(Footprint { helpers: helpers.len() })
}

fn release_copy(
    c: &mut Circuit,
    source: &[Bit],
    helpers: &[usize],
    alloc: &mut dyn LineAllocator,
) -> Result<(), BlockError> {
    if helpers.is_empty() {
        return Ok(());
    }
    let free = ControlContext::new();
    for (&t, &b) in helpers.iter().zip(source).rev() {
        xor_bit(c, &free, b, t)?;
    }
    alloc.release(helpers);
    Ok(())
}

/// `res ^= left < right` by subtracting `right` from `left` extended with a
/// borrow line.
fn less_onto(
    c: &mut Circuit,
    ctx: &ControlContext,
    left: &Operand,
    right: &Operand,
    res: usize,
    alloc: &mut dyn LineAllocator,
) -> Result<Footprint, BlockError> {
    let free = ControlContext::new();
    let lb = left.bits();
    let (mut reg, copied) = match mutable_lines(left, right, ctx) {
        Some(l) => (l, Vec::new()),
        None => {
            let h = alloc.acquire(c, lb.len())?;
            for (&t, &b) in h.iter().zip(&lb) {
                xor_bit(c, &free, b, t)?;
            }
            (h.clone(), h)
        }
    };
    let borrow = alloc.acquire(c, 1)?;
    reg.push(borrow[0]);
    let mut sub = right.bits();
    sub.push(Bit::Zero);
    let start = c.gate_count();
    build_sub_assign(c, &free, &reg, &Operand::Bits(sub))?;
    let end = c.gate_count();
    emit(c, ctx, Gate::cnot(borrow[0], res))?;
    c.replay_reversed(start, end);
    alloc.release(&borrow);
    release_copy(c, &lb, &copied, alloc)?;
    Ok(Footprint {
        helpers: copied.len() + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;

    fn lines(n: usize) -> Circuit {
        Circuit::with_lines(n)
    }

    #[test]
    fn xor_examples() {
        let mut c = lines(2);
        build_xor_assign(&mut c, &ControlContext::new(), &[1], &Operand::Lines(vec![0])).unwrap();
        assert_eq!(c.gates(), &[Gate::cnot(0, 1)]);

        let mut c = lines(2);
        let k = Operand::Const { value: 2, width: 2 };
        build_xor_assign(&mut c, &ControlContext::new(), &[0, 1], &k).unwrap();
        assert_eq!(c.gates(), &[Gate::not(1)]);

        let mut c = lines(3);
        let ctx = ControlContext::from_lines([0]);
        build_xor_assign(&mut c, &ctx, &[2], &Operand::Lines(vec![1])).unwrap();
        assert_eq!(c.gates(), &[Gate::toffoli(0, 1, 2)]);
    }

    #[test]
    fn overlap_and_width_errors() {
        let mut c = lines(4);
        let ctx = ControlContext::from_lines([0]);
        assert_eq!(
            build_xor_assign(&mut c, &ctx, &[0], &Operand::Lines(vec![1])),
            Err(BlockError::Overlap(0))
        );
        assert_eq!(
            build_add_assign(&mut c, &ControlContext::new(), &[1, 2], &Operand::Lines(vec![2, 3])),
            Err(BlockError::Overlap(2))
        );
        assert!(matches!(
            build_swap(&mut c, &ControlContext::new(), &[1], &[2, 3]),
            Err(BlockError::WidthMismatch { .. })
        ));
        assert_eq!(c.gate_count(), 0);
    }

    #[test]
    fn small_blocks() {
        let mut c = lines(2);
        build_add_assign(&mut c, &ControlContext::new(), &[1], &Operand::Lines(vec![0])).unwrap();
        assert_eq!(c.gates(), &[Gate::cnot(0, 1)]);

        let mut c = lines(1);
        build_increment(&mut c, &ControlContext::new(), &[0]).unwrap();
        assert_eq!(c.gates(), &[Gate::not(0)]);

        let mut c = lines(2);
        build_increment(&mut c, &ControlContext::new(), &[0, 1]).unwrap();
        assert_eq!(sim::run(&c, 0b11), 0);

        let mut c = lines(4);
        build_swap(&mut c, &ControlContext::new(), &[0, 1], &[2, 3]).unwrap();
        assert_eq!(c.gates(), &[Gate::swap(0, 2), Gate::swap(1, 3)]);
    }

    #[test]
    fn sub_is_reversed_add() {
        let mut add = lines(6);
        let ctx = ControlContext::from_lines([5]);
        build_add_assign(&mut add, &ctx, &[0, 1], &Operand::Lines(vec![2, 3])).unwrap();
        let mut sub = lines(6);
        build_sub_assign(&mut sub, &ctx, &[0, 1], &Operand::Lines(vec![2, 3])).unwrap();
        assert_eq!(sub.gates(), crate::circuit::reverse_circuit(&add).gates());
    }

    #[test]
    fn equality_one_bit() {
        let mut c = lines(3);
        c.line_mut(2).constant = true;
        let mut pool = HelperPool::default();
        build_binary_onto(
            &mut c,
            &ControlContext::new(),
            BinOp::Eq,
            &Operand::Lines(vec![0]),
            &Operand::Lines(vec![1]),
            &[2],
            &mut pool,
        )
        .unwrap();
        assert_eq!(c.gates(), &[Gate::cnot(0, 2), Gate::cnot(1, 2), Gate::not(2)]);
    }

    #[test]
    fn and_one_bit() {
        let mut c = lines(3);
        c.line_mut(2).constant = true;
        let mut pool = HelperPool::default();
        build_binary_onto(
            &mut c,
            &ControlContext::new(),
            BinOp::And,
            &Operand::Lines(vec![0]),
            &Operand::Lines(vec![1]),
            &[2],
            &mut pool,
        )
        .unwrap();
        assert_eq!(c.gates(), &[Gate::toffoli(0, 1, 2)]);
    }

    #[test]
    fn result_must_be_fresh() {
        let mut c = lines(3);
        let mut pool = HelperPool::default();
        let r = build_binary_onto(
            &mut c,
            &ControlContext::new(),
            BinOp::Add,
            &Operand::Lines(vec![0]),
            &Operand::Lines(vec![1]),
            &[2],
            &mut pool,
        );
        assert_eq!(r, Err(BlockError::ResultNotFresh(2)));
    }

    #[test]
    fn pool_reuses_lowest_line() {
        let mut c = lines(1);
        let mut pool = HelperPool::new(5);
        let a = pool.acquire(&mut c, 3).unwrap();
        assert_eq!(a, vec![1, 2, 3]);
        pool.release(&[3, 1]);
        assert_eq!(pool.acquire(&mut c, 1).unwrap(), vec![1]);
        assert_eq!(pool.acquire(&mut c, 2).unwrap(), vec![3, 4]);
        assert_eq!(pool.acquire(&mut c, 1), Err(BlockError::LineBudget { limit: 5 }));
        assert_eq!(pool.created_lines(), &[1, 2, 3, 4]);
    }
}
