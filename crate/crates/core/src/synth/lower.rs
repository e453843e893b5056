use std::collections::{HashMap, HashSet};

use crate::circuit::{Circuit, Gate, Line};
use crate::frontend::{
    infer_width, mask, operand_width, Access, AssignOp, BinOp, ElaboratedProgram, Expr, Module, ShiftOp,
    SignalKind, Stmt, UnaryOp,
};
use crate::gates::{
    build_add_assign, build_binary_onto, build_decrement, build_increment, build_not, build_sub_assign,
    build_swap, build_xor_assign, Bit, ControlContext, HelperPool, LineAllocator, Operand,
};

use super::{BoundSignal, SignalBinding, SynthError, SynthSettings, SynthesisMode};

type Result<T> = std::result::Result<T, SynthError>;

/// Signal name to (lines, width) for the module being lowered.
#[derive(Clone, Default)]
struct Env {
    signals: HashMap<String, Vec<usize>>,
}

impl Env {
    fn lines(&self, a: &Access) -> Vec<usize> {
        let lines = &self.signals[&a.name];
        a.bit_indices(lines.len() as u32)
            .expect("elaborated access")
            .into_iter()
            .map(|i| lines[i as usize])
            .collect()
    }

    fn width(&self, name: &str) -> Option<u32> {
        self.signals.get(name).map(|l| l.len() as u32)
    }
}

struct Lowerer<'p> {
    program: &'p ElaboratedProgram,
    max_lines: usize,
    circuit: Circuit,
    pool: HelperPool,
    /// Local signals of called modules.
    callee_locals: Vec<usize>,
    /// Operand lines overwritten in place by clean evaluation, not yet undone.
    mutated: Vec<usize>,
}

pub(super) fn lower(
    program: &ElaboratedProgram,
    mode: SynthesisMode,
    settings: &SynthSettings,
) -> Result<(Circuit, SignalBinding)> {
    let mut l = Lowerer {
        program,
        max_lines: settings.max_lines,
        circuit: Circuit::new(),
        pool: HelperPool::new(settings.max_lines),
        callee_locals: Vec::new(),
        mutated: Vec::new(),
    };
    let entry = program.entry();
    let mut binding = SignalBinding::default();
    let mut env = Env::default();
    for sig in entry.signals() {
        let width = sig.width.expect("elaborated width");
        let mut lines = Vec::with_capacity(width as usize);
        for bit in 0..width {
            let label = format!("{}.{bit}", sig.name);
            let mut line = Line::new(label.clone());
            match sig.kind {
                SignalKind::In => line.input = Some(label),
                SignalKind::Out => line.output = Some(label),
                SignalKind::Inout | SignalKind::State => {
                    line.input = Some(label.clone());
                    line.output = Some(label);
                }
                SignalKind::Wire => line.constant = true,
            }
            lines.push(l.add_line(line)?);
        }
        env.signals.insert(sig.name.to_string(), lines.clone());
        binding.signals.insert(sig.name.to_string(), BoundSignal { kind: sig.kind, lines });
    }

    let clean = mode == SynthesisMode::LineAware;
    l.body(&env, &ControlContext::new(), &entry.body, clean)?;

    // Conservative garbage marking: a local or helper line is garbage once
    // some gate targets it, unless it went back to the pool clean.
    let targeted = l.circuit.targeted_lines();
    let free: HashSet<usize> = l.pool.free_lines().iter().copied().collect();
    let wires = binding
        .signals
        .values()
        .filter(|s| s.kind == SignalKind::Wire)
        .flat_map(|s| s.lines.iter().copied());
    let locals: Vec<usize> = wires
        .chain(l.pool.created_lines().iter().copied())
        .chain(l.callee_locals.iter().copied())
        .collect();
    for line in locals {
        l.circuit.line_mut(line).garbage = targeted[line] && !free.contains(&line);
    }
    binding.helpers = l.pool.created_lines().to_vec();
    Ok((l.circuit, binding))
}

impl Lowerer<'_> {
    fn add_line(&mut self, line: Line) -> Result<usize> {
        if self.circuit.line_count() >= self.max_lines {
            return Err(SynthError::LineBudget { limit: self.max_lines });
        }
        Ok(self.circuit.add_line(line))
    }

    fn acquire(&mut self, n: usize) -> Result<Vec<usize>> {
        Ok(self.pool.acquire(&mut self.circuit, n)?)
    }

    fn body(&mut self, env: &Env, ctx: &ControlContext, body: &[Stmt], clean: bool) -> Result<()> {
        for s in body {
            self.stmt(env, ctx, s, clean)?;
        }
        Ok(())
    }

    fn stmt(&mut self, env: &Env, ctx: &ControlContext, stmt: &Stmt, clean: bool) -> Result<()> {
        let c = &mut self.circuit;
        match stmt {
            Stmt::Skip { .. } => {}
            Stmt::Swap { lhs, rhs, .. } => build_swap(c, ctx, &env.lines(lhs), &env.lines(rhs))?,
            Stmt::Unary { op, target, .. } => {
                let t = env.lines(target);
                match op {
                    UnaryOp::Invert => build_not(c, ctx, &t)?,
                    UnaryOp::Increment => build_increment(c, ctx, &t)?,
                    UnaryOp::Decrement => build_decrement(c, ctx, &t)?,
                }
            }
            Stmt::Assign { op: AssignOp::Xor, lhs, rhs, .. } => {
                let target = env.lines(lhs);
                self.xor_onto(env, ctx, &ControlContext::new(), rhs, &target, clean)?;
            }
            Stmt::Assign { op, lhs, rhs, .. } => {
                let target = env.lines(lhs);
                let width = target.len() as u32;
                let mut temps = Vec::new();
                let mark = self.mutated.len();
                let start = self.circuit.gate_count();
                let value = self.eval(env, ctx, rhs, width, clean, &mut temps)?;
                let mid = self.circuit.gate_count();
                let c = &mut self.circuit;
                match op {
                    AssignOp::Add => build_add_assign(c, ctx, &target, &value)?,
                    _ => build_sub_assign(c, ctx, &target, &value)?,
                }
                if clean {
                    self.circuit.replay_reversed(start, mid);
                    self.mutated.truncate(mark);
                    self.pool.release(&temps);
                }
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
                fi_cond,
                ..
            } => self.if_else(env, ctx, cond, then_body, else_body, fi_cond, clean)?,
            Stmt::For { .. } => unreachable!("elaborated programs contain no loops"),
            Stmt::Call { module, args, .. } => {
                self.call(env, ctx, module, args)?;
            }
            Stmt::Uncall { module, args, .. } => {
                let start = self.circuit.gate_count();
                self.call(env, ctx, module, args)?;
                self.circuit.reverse_tail(start);
            }
        }
        Ok(())
    }

    /// Inlines `module` with its parameters bound to the argument lines.
    /// Callee bodies are always lowered clean so that an uncall, being the
    /// reversed gate sequence, undoes the call exactly.
    fn call(&mut self, env: &Env, ctx: &ControlContext, module: &str, args: &[String]) -> Result<()> {
        let callee: &Module = self
            .program
            .module(module)
            .ok_or_else(|| SynthError::UnknownModule(module.to_string()))?;
        let mut inner = Env::default();
        for (p, a) in callee.params.iter().zip(args) {
            inner.signals.insert(p.name.clone(), env.signals[a].clone());
        }
        for local in &callee.locals {
            let width = local.width.expect("elaborated width");
            let mut lines = Vec::new();
            for bit in 0..width {
                let line = self.add_line(Line::constant(format!("{}.{}.{bit}", callee.name, local.name)))?;
                self.callee_locals.push(line);
                lines.push(line);
            }
            inner.signals.insert(local.name.clone(), lines);
        }
        self.body(&inner, ctx, &callee.body, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn if_else(
        &mut self,
        env: &Env,
        ctx: &ControlContext,
        cond: &Expr,
        then_body: &[Stmt],
        else_body: &[Stmt],
        fi_cond: &Expr,
        clean: bool,
    ) -> Result<()> {
        if let Expr::Const(v) = cond {
            let chosen = if v & 1 == 1 { then_body } else { else_body };
            return self.body(env, ctx, chosen, clean);
        }

        let mut written = HashSet::new();
        writes(env, self.program, then_body, &mut written);
        writes(env, self.program, else_body, &mut written);
        let mut else_reads = HashSet::new();
        reads(env, else_body, &mut else_reads);

        let direct = condition_line(env, cond)
            .filter(|t| !ctx.contains(*t) && !written.contains(t) && !else_reads.contains(t));

        let mut cond_reads = HashSet::new();
        expr_reads(env, cond, &mut cond_reads);
        let mut branch_reads = else_reads;
        reads(env, then_body, &mut branch_reads);

        // Clean evaluation kept alive across the branches, undone afterwards.
        let mut kept: Option<(usize, usize, Vec<usize>, usize)> = None;
        let (t, pooled) = match direct {
            Some(t) => (t, false),
            None if clean && cond_reads.is_disjoint(&written) => {
                let mark = self.mutated.len();
                let start = self.circuit.gate_count();
                let mut temps = Vec::new();
                let value = self.eval(env, ctx, cond, 1, true, &mut temps)?;
                let end = self.circuit.gate_count();
                let untouched = self.mutated[mark..]
                    .iter()
                    .all(|l| !branch_reads.contains(l) && !written.contains(l));
                match value.as_lines().as_deref() {
                    Some(&[l]) if untouched && temps.contains(&l) => {
                        kept = Some((start, end, temps, mark));
                        (l, false)
                    }
                    _ => {
                        let touched: HashSet<usize> = self.circuit.gates()[start..end]
                            .iter()
                            .flat_map(|g| g.targets.iter().copied())
                            .collect();
                        let t = self.acquire_avoiding(1, &touched)?[0];
                        build_xor_assign(&mut self.circuit, &ControlContext::new(), &[t], &value)?;
                        self.circuit.replay_reversed(start, end);
                        self.mutated.truncate(mark);
                        self.pool.release(&temps);
                        (t, true)
                    }
                }
            }
            None if clean => {
                let t = self.acquire(1)?[0];
                self.eval_into(env, ctx, cond, t)?;
                (t, true)
            }
            None => {
                let before = self.circuit.line_count();
                let mut temps = Vec::new();
                let value = self.eval(env, ctx, cond, 1, false, &mut temps)?;
                match value.as_lines().as_deref() {
                    Some(&[l]) if l >= before => (l, false),
                    _ => {
                        let t = self.acquire(1)?[0];
                        build_xor_assign(&mut self.circuit, &ControlContext::new(), &[t], &value)?;
                        (t, false)
                    }
                }
            }
        };

        let inner = ctx.with(t);
        self.body(env, &inner, then_body, clean)?;
        self.circuit.append_gate(Gate::not(t)).map_err(crate::gates::BlockError::from)?;
        self.body(env, &inner, else_body, clean)?;
        self.circuit.append_gate(Gate::not(t)).map_err(crate::gates::BlockError::from)?;

        if pooled {
            self.eval_into(env, ctx, fi_cond, t)?;
            self.pool.release(&[t]);
        }
        if let Some((start, end, temps, mark)) = kept {
            self.circuit.replay_reversed(start, end);
            self.mutated.truncate(mark);
            self.pool.release(&temps);
        }
        Ok(())
    }

    /// `t ^= expr`, leaving every other line as it was.
    fn eval_into(&mut self, env: &Env, ctx: &ControlContext, expr: &Expr, t: usize) -> Result<()> {
        self.xor_onto(env, &ControlContext::new(), ctx, expr, &[t], true)
    }

    /// `target ^= expr` under `ctx`. Operators whose block works on any
    /// result register write straight into `target`; everything else is
    /// evaluated first and xored in. `protect` lists lines that evaluation
    /// must not modify.
    fn xor_onto(
        &mut self,
        env: &Env,
        ctx: &ControlContext,
        protect: &ControlContext,
        expr: &Expr,
        target: &[usize],
        clean: bool,
    ) -> Result<()> {
        let guard = ControlContext::from_lines(ctx.lines().iter().chain(protect.lines()).copied());
        let mut temps = Vec::new();
        let mark = self.mutated.len();
        let start = self.circuit.gate_count();
        match expr {
            Expr::Binary { op, lhs, rhs } if !matches!(op, BinOp::Add | BinOp::Sub) => {
                let w = self.operand_width(env, *op, expr, target.len() as u32);
                let (l, r) = self.operands(env, &guard, lhs, rhs, w, clean, &mut temps)?;
                let mid = self.circuit.gate_count();
                build_binary_onto(&mut self.circuit, ctx, *op, &l, &r, target, &mut self.pool)?;
                if clean {
                    self.circuit.replay_reversed(start, mid);
                }
            }
            _ => {
                let value = self.eval(env, &guard, expr, target.len() as u32, clean, &mut temps)?;
                let mid = self.circuit.gate_count();
                build_xor_assign(&mut self.circuit, ctx, target, &value)?;
                if clean {
                    self.circuit.replay_reversed(start, mid);
                }
            }
        }
        if clean {
            self.mutated.truncate(mark);
            self.pool.release(&temps);
        }
        Ok(())
    }

    fn operand_width(&self, env: &Env, op: BinOp, expr: &Expr, width: u32) -> u32 {
        let widths = |n: &str| env.width(n);
        let Expr::Binary { lhs, rhs, .. } = expr else {
            return width;
        };
        if op.yields_bit() {
            operand_width(op, lhs, rhs, &widths).unwrap_or(width)
        } else {
            infer_width(expr, &widths, Some(width)).unwrap_or(width)
        }
    }

    /// Evaluates `expr` at `width` bits and returns where its value lives.
    ///
    /// Clean evaluation may modify operand lines in place; the caller undoes
    /// it by replaying the emitted gates in reverse and then releasing
    /// `temps`. Lines in `guard` are never modified. Otherwise results go
    /// to fresh lines that are kept.
    fn eval(
        &mut self,
        env: &Env,
        guard: &ControlContext,
        expr: &Expr,
        width: u32,
        clean: bool,
        temps: &mut Vec<usize>,
    ) -> Result<Operand> {
        match expr {
            Expr::Const(v) => Ok(Operand::Const {
                value: v & mask(width),
                width,
            }),
            Expr::Signal(a) => Ok(Operand::Lines(env.lines(a))),
            Expr::Shift { op, operand, amount } => {
                let widths = |n: &str| env.width(n);
                let w = infer_width(operand, &widths, Some(width)).unwrap_or(width);
                let inner = self.eval(env, guard, operand, w, clean, temps)?;
                let k = amount.as_lit().expect("elaborated amount");
                Ok(shift(inner.bits(), *op, k))
            }
            Expr::WidthOf(_) | Expr::LoopVar(_) => unreachable!("substituted by elaboration"),
            Expr::Binary { op, lhs, rhs } => {
                let w = self.operand_width(env, *op, expr, width);
                let (left, right) = self.operands(env, guard, lhs, rhs, w, clean, temps)?;
                self.combine(guard, *op, left, right, w, clean, temps)
            }
        }
    }

    /// Evaluates both operands of a binary node, left first.
    #[allow(clippy::too_many_arguments)]
    fn operands(
        &mut self,
        env: &Env,
        guard: &ControlContext,
        lhs: &Expr,
        rhs: &Expr,
        w: u32,
        clean: bool,
        temps: &mut Vec<usize>,
    ) -> Result<(Operand, Operand)> {
        if !clean {
            let left = self.eval(env, guard, lhs, w, false, temps)?;
            let right = self.eval(env, guard, rhs, w, false, temps)?;
            return Ok((left, right));
        }
        let mut rhs_reads = HashSet::new();
        expr_reads(env, rhs, &mut rhs_reads);

        let mark = self.mutated.len();
        let start = self.circuit.gate_count();
        let mut left_temps = Vec::new();
        let mut left = self.eval(env, guard, lhs, w, true, &mut left_temps)?;
        let end = self.circuit.gate_count();
        if self.mutated[mark..].iter().any(|l| rhs_reads.contains(l)) {
            // The right operand reads lines the left evaluation changed:
            // copy the left value out and undo the left evaluation first.
            let touched: HashSet<usize> = self.circuit.gates()[start..end]
                .iter()
                .flat_map(|g| g.targets.iter().copied())
                .collect();
            let h = self.acquire_avoiding(w as usize, &touched)?;
            build_xor_assign(&mut self.circuit, &ControlContext::new(), &h, &left)?;
            self.circuit.replay_reversed(start, end);
            self.mutated.truncate(mark);
            self.pool.release(&left_temps);
            left = Operand::Lines(h.clone());
            temps.extend(h);
        } else {
            temps.extend(left_temps);
        }
        // The right operand must not overwrite lines the left value lives on.
        let keep = ControlContext::from_lines(guard.lines().iter().copied().chain(left.lines()));
        let right = self.eval(env, &keep, rhs, w, true, temps)?;
        Ok((left, right))
    }

    /// Applies `op` to evaluated operands.
    #[allow(clippy::too_many_arguments)]
    fn combine(
        &mut self,
        guard: &ControlContext,
        op: BinOp,
        left: Operand,
        right: Operand,
        w: u32,
        clean: bool,
        temps: &mut Vec<usize>,
    ) -> Result<Operand> {
        let free = ControlContext::new();
        if clean && op.is_invertible() {
            let mut candidates = vec![(&left, &right)];
            if op != BinOp::Sub {
                candidates.push((&right, &left));
            }
            for (dst, src) in candidates {
                if let Some(lines) = in_place(dst, src, guard) {
                    let c = &mut self.circuit;
                    match op {
                        BinOp::Add => build_add_assign(c, &free, &lines, src)?,
                        BinOp::Sub => build_sub_assign(c, &free, &lines, src)?,
                        _ => build_xor_assign(c, &free, &lines, src)?,
                    }
                    self.mutated.extend(&lines);
                    return Ok(Operand::Lines(lines));
                }
            }
        }
        let rw = if op.yields_bit() { 1 } else { w as usize };
        let result = self.acquire(rw)?;
        if clean {
            temps.extend(&result);
        }
        build_binary_onto(&mut self.circuit, &free, op, &left, &right, &result, &mut self.pool)?;
        Ok(Operand::Lines(result))
    }

    /// Pool lines none of which is in `avoid`.
    fn acquire_avoiding(&mut self, n: usize, avoid: &HashSet<usize>) -> Result<Vec<usize>> {
        let mut got = Vec::new();
        let mut skipped = Vec::new();
        while got.len() < n {
            let l = self.acquire(1)?[0];
            if avoid.contains(&l) {
                skipped.push(l);
            } else {
                got.push(l);
            }
        }
        self.pool.release(&skipped);
        Ok(got)
    }
}


/// Lines of `op` if they can be overwritten with a result: all bits are
/// distinct lines, none is a context line or read by `other`.
fn in_place(op: &Operand, other: &Operand, ctx: &ControlContext) -> Option<Vec<usize>> {
    let lines = op.as_lines()?;
    let other = other.lines();
    let mut seen = HashSet::new();
    let ok = lines
        .iter()
        .all(|l| seen.insert(*l) && !ctx.contains(*l) && !other.contains(l));
    ok.then_some(lines)
}

fn shift(bits: Vec<Bit>, op: ShiftOp, k: u64) -> Operand {
    let w = bits.len();
    let k = usize::try_from(k).unwrap_or(usize::MAX).min(w);
    let out: Vec<Bit> = match op {
        ShiftOp::Left => std::iter::repeat_n(Bit::Zero, k)
            .chain(bits[..w - k].iter().copied())
            .collect(),
        ShiftOp::Right => bits[k..]
            .iter()
            .copied()
            .chain(std::iter::repeat_n(Bit::Zero, k))
            .collect(),
    };
    Operand::Bits(out).simplify()
}

/// The line a condition can be read from directly: a single bit, or a
/// single bit compared with 1 (or unequal to 0).
fn condition_line(env: &Env, cond: &Expr) -> Option<usize> {
    let single = |e: &Expr| match e {
        Expr::Signal(a) => match env.lines(a).as_slice() {
            [l] => Some(*l),
            _ => None,
        },
        _ => None,
    };
    match cond {
        Expr::Signal(_) => single(cond),
        Expr::Binary { op, lhs, rhs } => {
            let want = match op {
                BinOp::Eq => 1,
                BinOp::Ne => 0,
                _ => return None,
            };
            match (lhs.as_ref(), rhs.as_ref()) {
                (e, Expr::Const(v)) | (Expr::Const(v), e) if *v == want => single(e),
                _ => None,
            }
        }
        _ => None,
    }
}

fn expr_reads(env: &Env, e: &Expr, out: &mut HashSet<usize>) {
    e.for_each_access(&mut |a| out.extend(env.lines(a)));
}

/// Lines possibly read by `body`, including everything passed to calls.
fn reads(env: &Env, body: &[Stmt], out: &mut HashSet<usize>) {
    for s in body {
        match s {
            Stmt::Skip { .. } | Stmt::For { .. } => {}
            Stmt::Swap { lhs, rhs, .. } => {
                out.extend(env.lines(lhs));
                out.extend(env.lines(rhs));
            }
            Stmt::Unary { target, .. } => out.extend(env.lines(target)),
            Stmt::Assign { lhs, rhs, .. } => {
                out.extend(env.lines(lhs));
                expr_reads(env, rhs, out);
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
                fi_cond,
                ..
            } => {
                expr_reads(env, cond, out);
                expr_reads(env, fi_cond, out);
                reads(env, then_body, out);
                reads(env, else_body, out);
            }
            Stmt::Call { args, .. } | Stmt::Uncall { args, .. } => {
                for a in args {
                    out.extend(env.signals[a].iter().copied());
                }
            }
        }
    }
}

/// Lines possibly written by `body`.
fn writes(env: &Env, program: &ElaboratedProgram, body: &[Stmt], out: &mut HashSet<usize>) {
    for s in body {
        match s {
            Stmt::Skip { .. } | Stmt::For { .. } => {}
            Stmt::Swap { lhs, rhs, .. } => {
                out.extend(env.lines(lhs));
                out.extend(env.lines(rhs));
            }
            Stmt::Unary { target, .. } => out.extend(env.lines(target)),
            Stmt::Assign { lhs, .. } => out.extend(env.lines(lhs)),
            Stmt::If {
                then_body, else_body, ..
            } => {
                writes(env, program, then_body, out);
                writes(env, program, else_body, out);
            }
            Stmt::Call { module, args, .. } | Stmt::Uncall { module, args, .. } => {
                let params = program.module(module).map(|m| m.params.as_slice()).unwrap_or(&[]);
                for (p, a) in params.iter().zip(args) {
                    if SignalKind::from(p.direction).is_writable() {
                        out.extend(env.signals[a].iter().copied());
                    }
                }
            }
        }
    }
}
