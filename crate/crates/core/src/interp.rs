//! Reference evaluator for elaborated programs.
//!
//! Deliberately simple: every synthesized circuit is checked against the
//! values computed here.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::frontend::{
    infer_width, mask, operand_width, Access, ElaboratedProgram, Expr, Module, SignalKind, Stmt, UnaryOp,
};

/// Values of named signals. Every value fits its signal's width.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SignalState(BTreeMap<String, u64>);

impl SignalState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<u64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: impl Into<String>, value: u64) {
        self.0.insert(name.into(), value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restricts the state to the given names.
    pub fn select<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> SignalState {
        names
            .into_iter()
            .filter_map(|n| self.get(n).map(|v| (n.to_string(), v)))
            .collect()
    }
}

impl<S: Into<String>> FromIterator<(S, u64)> for SignalState {
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

impl fmt::Display for SignalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpResult {
    pub final_state: SignalState,
    /// Executed primitive statements, one per entry, when tracing.
    pub trace: Option<Vec<String>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("unassigned input {0}")]
    MissingInput(String),
    #[error("signal {0} is not an input of the entry module")]
    NotAnInput(String),
    #[error("value {value} does not fit signal {name} of width {width}")]
    ValueTooWide { name: String, value: u64, width: u32 },
    #[error("fi-condition of `{stmt}` evaluated differently from its if-condition; the program is not reversible")]
    FiMismatch { stmt: String },
    #[error("unknown module {0}")]
    UnknownModule(String),
}

/// Runs the entry module of `program` on `inputs`.
pub fn interpret(program: &ElaboratedProgram, inputs: &SignalState) -> Result<InterpResult, InterpError> {
    run(program, inputs, false)
}

/// Like [`interpret`], additionally recording every executed primitive
/// statement.
pub fn interpret_traced(program: &ElaboratedProgram, inputs: &SignalState) -> Result<InterpResult, InterpError> {
    run(program, inputs, true)
}

fn run(program: &ElaboratedProgram, inputs: &SignalState, trace: bool) -> Result<InterpResult, InterpError> {
    let entry = program.entry();
    let mut frame = Frame::default();
    for sig in entry.signals() {
        let width = sig.width.unwrap_or(1);
        let value = if sig.kind.is_primary_input() {
            let v = inputs
                .get(sig.name)
                .ok_or_else(|| InterpError::MissingInput(sig.name.to_string()))?;
            if v > mask(width) {
                return Err(InterpError::ValueTooWide {
                    name: sig.name.to_string(),
                    value: v,
                    width,
                });
            }
            v
        } else {
            0
        };
        frame.signals.insert(sig.name.to_string(), (value, width));
    }
    for (name, _) in inputs.iter() {
        match entry.signal(name) {
            Some(s) if s.kind.is_primary_input() => {}
            _ => return Err(InterpError::NotAnInput(name.to_string())),
        }
    }

    let mut machine = Machine {
        program,
        trace: trace.then(Vec::new),
    };
    machine.exec_body(&entry.body, &mut frame)?;

    let final_state = entry
        .signals()
        .map(|s| (s.name.to_string(), frame.signals[s.name].0))
        .collect();
    Ok(InterpResult {
        final_state,
        trace: machine.trace,
    })
}

/// Executes `body` in the scope of the entry module, starting from a value
/// for every one of its signals (wires and outputs included). Used to
/// test statement sequences against arbitrary states.
pub fn execute(program: &ElaboratedProgram, body: &[Stmt], state: &SignalState) -> Result<SignalState, InterpError> {
    let entry = program.entry();
    let mut frame = Frame::default();
    for sig in entry.signals() {
        let width = sig.width.unwrap_or(1);
        let v = state
            .get(sig.name)
            .ok_or_else(|| InterpError::MissingInput(sig.name.to_string()))?;
        if v > mask(width) {
            return Err(InterpError::ValueTooWide {
                name: sig.name.to_string(),
                value: v,
                width,
            });
        }
        frame.signals.insert(sig.name.to_string(), (v, width));
    }
    let mut machine = Machine { program, trace: None };
    machine.exec_body(body, &mut frame)?;
    Ok(entry
        .signals()
        .map(|s| (s.name.to_string(), frame.signals[s.name].0))
        .collect())
}

#[derive(Default)]
struct Frame {
    signals: HashMap<String, (u64, u32)>,
}

impl Frame {
    fn width(&self, name: &str) -> Option<u32> {
        self.signals.get(name).map(|(_, w)| *w)
    }

    fn read(&self, a: &Access) -> u64 {
        let (value, width) = self.signals[&a.name];
        let bits = a.bit_indices(width).expect("elaborated access");
        bits.iter()
            .enumerate()
            .fold(0, |acc, (k, &i)| acc | (((value >> i) & 1) << k))
    }

    fn write(&mut self, a: &Access, v: u64) {
        let entry = self.signals.get_mut(&a.name).expect("declared signal");
        let bits = a.bit_indices(entry.1).expect("elaborated access");
        for (k, &i) in bits.iter().enumerate() {
            entry.0 = (entry.0 & !(1 << i)) | (((v >> k) & 1) << i);
        }
    }

    fn access_width(&self, a: &Access) -> u32 {
        a.width(self.signals[&a.name].1).expect("elaborated access")
    }
}

struct Machine<'p> {
    program: &'p ElaboratedProgram,
    trace: Option<Vec<String>>,
}

impl<'p> Machine<'p> {
    fn record(&mut self, s: &Stmt) {
        if let Some(t) = &mut self.trace {
            t.push(s.to_string());
        }
    }

    fn exec_body(&mut self, body: &[Stmt], frame: &mut Frame) -> Result<(), InterpError> {
        for s in body {
            self.exec(s, frame)?;
        }
        Ok(())
    }

    fn exec(&mut self, stmt: &Stmt, frame: &mut Frame) -> Result<(), InterpError> {
        match stmt {
            Stmt::Skip { .. } => self.record(stmt),
            Stmt::Swap { lhs, rhs, .. } => {
                self.record(stmt);
                let a = frame.read(lhs);
                let b = frame.read(rhs);
                frame.write(lhs, b);
                frame.write(rhs, a);
            }
            Stmt::Unary { op, target, .. } => {
                self.record(stmt);
                let w = frame.access_width(target);
                let v = frame.read(target);
                let nv = match op {
                    UnaryOp::Invert => !v,
                    UnaryOp::Increment => v.wrapping_add(1),
                    UnaryOp::Decrement => v.wrapping_sub(1),
                } & mask(w);
                frame.write(target, nv);
            }
            Stmt::Assign { op, lhs, rhs, .. } => {
                self.record(stmt);
                let w = frame.access_width(lhs);
                let value = eval(rhs, Some(w), frame);
                let old = frame.read(lhs);
                frame.write(lhs, op.apply(old, value, w));
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
                fi_cond,
                ..
            } => {
                let taken = eval(cond, Some(1), frame) != 0;
                if taken {
                    self.exec_body(then_body, frame)?;
                } else {
                    self.exec_body(else_body, frame)?;
                }
                let after = eval(fi_cond, Some(1), frame) != 0;
                if after != taken {
                    return Err(InterpError::FiMismatch {
                        stmt: stmt.to_string(),
                    });
                }
            }
            Stmt::For { .. } => unreachable!("elaborated programs contain no loops"),
            Stmt::Call { module, args, .. } => {
                let callee = self.callee(module)?;
                self.invoke(callee, args, frame, false)?;
            }
            Stmt::Uncall { module, args, .. } => {
                let callee = self.callee(module)?;
                self.invoke(callee, args, frame, true)?;
            }
        }
        Ok(())
    }

    fn callee(&self, name: &str) -> Result<&'p Module, InterpError> {
        self.program
            .module(name)
            .ok_or_else(|| InterpError::UnknownModule(name.to_string()))
    }

    fn invoke(&mut self, callee: &Module, args: &[String], frame: &mut Frame, inverse: bool) -> Result<(), InterpError> {
        let mut inner = Frame::default();
        for (p, arg) in callee.params.iter().zip(args) {
            inner.signals.insert(p.name.clone(), frame.signals[arg]);
        }
        for l in &callee.locals {
            inner.signals.insert(l.name.clone(), (0, l.width.unwrap_or(1)));
        }
        if inverse {
            let body = invert_statements(&callee.body);
            self.exec_body(&body, &mut inner)?;
        } else {
            self.exec_body(&callee.body, &mut inner)?;
        }
        for (p, arg) in callee.params.iter().zip(args) {
            if SignalKind::from(p.direction).is_writable() {
                frame.signals.get_mut(arg).expect("argument").0 = inner.signals[&p.name].0;
            }
        }
        Ok(())
    }
}

/// Evaluates `expr` on `frame`; literals take the width `expected`.
fn eval(expr: &Expr, expected: Option<u32>, frame: &Frame) -> u64 {
    let widths = |n: &str| frame.width(n);
    match expr {
        Expr::Const(v) => *v & mask(expected.unwrap_or(64)),
        Expr::Signal(a) => frame.read(a),
        Expr::Binary { op, lhs, rhs } => {
            let w = if op.yields_bit() {
                operand_width(*op, lhs, rhs, &widths).unwrap_or(64)
            } else {
                infer_width(expr, &widths, expected).unwrap_or(64)
            };
            let a = eval(lhs, Some(w), frame);
            let b = eval(rhs, Some(w), frame);
            op.apply(a, b, w)
        }
        Expr::Shift { op, operand, amount } => {
            let w = infer_width(operand, &widths, expected).unwrap_or(64);
            let v = eval(operand, Some(w), frame);
            op.apply(v, amount.as_lit().expect("elaborated amount"), w)
        }
        Expr::WidthOf(_) | Expr::LoopVar(_) => unreachable!("substituted by elaboration"),
    }
}

/// Returns the statement list that undoes `body`: reversed order, each
/// statement replaced by its inverse.
///
/// Expects elaborated statements; loops have no statement-level inverse
/// here and cause a panic.
pub fn invert_statements(body: &[Stmt]) -> Vec<Stmt> {
    body.iter().rev().map(invert).collect()
}

fn invert(stmt: &Stmt) -> Stmt {
    match stmt {
        Stmt::Skip { .. } | Stmt::Swap { .. } => stmt.clone(),
        Stmt::Unary { op, target, span } => Stmt::Unary {
            op: op.inverse(),
            target: target.clone(),
            span: *span,
        },
        Stmt::Assign { op, lhs, rhs, span } => Stmt::Assign {
            op: op.inverse(),
            lhs: lhs.clone(),
            rhs: rhs.clone(),
            span: *span,
        },
        Stmt::If {
            cond,
            then_body,
            else_body,
            fi_cond,
            span,
        } => Stmt::If {
            cond: fi_cond.clone(),
            then_body: invert_statements(then_body),
            else_body: invert_statements(else_body),
            fi_cond: cond.clone(),
            span: *span,
        },
        Stmt::Call { module, args, span } => Stmt::Uncall {
            module: module.clone(),
            args: args.clone(),
            span: *span,
        },
        Stmt::Uncall { module, args, span } => Stmt::Call {
            module: module.clone(),
            args: args.clone(),
            span: *span,
        },
        Stmt::For { .. } => panic!("invert_statements requires elaborated statements"),
    }
}
