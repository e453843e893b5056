//! Loop unrolling, loop-variable and `#x` substitution, constant folding.

use std::collections::HashMap;

use super::analyze::{check_program, finish, CheckedProgram};
use super::ast::*;
use super::diag::{Diagnostic, Diagnostics, Span};
use super::ElabSettings;

/// A program in which every width, index, bound and shift amount is a
/// literal and no loops remain. Produced only by [`elaborate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElaboratedProgram {
    program: Program,
}

impl ElaboratedProgram {
    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn into_program(self) -> Program {
        self.program
    }

    pub fn entry(&self) -> &Module {
        self.program.entry().expect("elaborated programs have a module")
    }

    pub fn module(&self, name: &str) -> Option<&Module> {
        self.program.module(name)
    }

    /// Width of a declared signal of `module`.
    pub fn width_of(module: &Module, name: &str) -> Option<u32> {
        module.signal(name).and_then(|s| s.width)
    }
}

pub fn elaborate(checked: &CheckedProgram, settings: &ElabSettings) -> Result<ElaboratedProgram, Diagnostics> {
    let mut e = Elaborator {
        default_width: checked.default_width,
        budget: settings.max_unroll,
        max_unroll: settings.max_unroll,
        diags: Vec::new(),
    };
    let modules = checked
        .program
        .modules
        .iter()
        .map(|m| e.module(m))
        .collect();
    if !e.diags.is_empty() {
        return Err(Diagnostics(e.diags));
    }
    let program = Program { modules };
    let diags = check_program(&program, checked.default_width, true);
    let checked = finish(program, diags, checked.default_width)?;
    Ok(ElaboratedProgram {
        program: checked.program,
    })
}

struct Elaborator {
    default_width: u32,
    budget: usize,
    max_unroll: usize,
    diags: Vec<Diagnostic>,
}

struct Scope<'a> {
    widths: HashMap<&'a str, u32>,
    vars: Vec<(String, i64)>,
}

impl Scope<'_> {
    fn var(&self, name: &str) -> Option<i64> {
        self.vars.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

impl Elaborator {
    fn module(&mut self, m: &Module) -> Module {
        let dw = self.default_width;
        let params: Vec<Param> = m
            .params
            .iter()
            .map(|p| Param {
                width: Some(p.width.unwrap_or(dw)),
                ..p.clone()
            })
            .collect();
        let locals: Vec<Local> = m
            .locals
            .iter()
            .map(|l| Local {
                width: Some(l.width.unwrap_or(dw)),
                ..l.clone()
            })
            .collect();
        let mut scope = Scope {
            widths: HashMap::new(),
            vars: Vec::new(),
        };
        for p in &params {
            scope.widths.insert(&p.name, p.width.unwrap_or(dw));
        }
        for l in &locals {
            scope.widths.insert(&l.name, l.width.unwrap_or(dw));
        }
        let mut body = Vec::new();
        self.body(&m.body, &mut scope, &mut body);
        Module {
            name: m.name.clone(),
            params: params.clone(),
            locals: locals.clone(),
            body,
            span: m.span,
        }
    }

    fn body(&mut self, stmts: &[Stmt], scope: &mut Scope<'_>, out: &mut Vec<Stmt>) {
        for s in stmts {
            self.stmt(s, scope, out);
        }
    }

    fn stmt(&mut self, stmt: &Stmt, scope: &mut Scope<'_>, out: &mut Vec<Stmt>) {
        match stmt {
            Stmt::Skip { span } => out.push(Stmt::Skip { span: *span }),
            Stmt::Swap { lhs, rhs, span } => {
                if let (Some(lhs), Some(rhs)) = (self.access(lhs, scope), self.access(rhs, scope)) {
                    out.push(Stmt::Swap { lhs, rhs, span: *span });
                }
            }
            Stmt::Unary { op, target, span } => {
                if let Some(target) = self.access(target, scope) {
                    out.push(Stmt::Unary {
                        op: *op,
                        target,
                        span: *span,
                    });
                }
            }
            Stmt::Assign { op, lhs, rhs, span } => {
                let Some(lhs) = self.access(lhs, scope) else { return };
                let width = lhs.width(scope.widths.get(lhs.name.as_str()).copied().unwrap_or(1));
                if let Some(rhs) = self.expr(rhs, width, scope) {
                    out.push(Stmt::Assign {
                        op: *op,
                        lhs,
                        rhs,
                        span: *span,
                    });
                }
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
                fi_cond,
                span,
            } => {
                let cond = self.expr(cond, Some(1), scope);
                let mut then_out = Vec::new();
                self.body(then_body, scope, &mut then_out);
                let mut else_out = Vec::new();
                self.body(else_body, scope, &mut else_out);
                let fi_cond = self.expr(fi_cond, Some(1), scope);
                if let (Some(cond), Some(fi_cond)) = (cond, fi_cond) {
                    out.push(Stmt::If {
                        cond,
                        then_body: then_out,
                        else_body: else_out,
                        fi_cond,
                        span: *span,
                    });
                }
            }
            Stmt::For {
                var,
                from,
                to,
                step,
                body,
                span,
            } => {
                let (Some(from), Some(to)) = (self.number(from, scope, *span), self.number(to, scope, *span)) else {
                    return;
                };
                let step = match step {
                    Some(s) => match self.number(s, scope, *span) {
                        Some(s) => s,
                        None => return,
                    },
                    None => 1,
                };
                if step == 0 {
                    self.diags.push(Diagnostic::error("loop step must not be 0", *span));
                    return;
                }
                let mut i = from;
                while (step > 0 && i <= to) || (step < 0 && i >= to) {
                    if self.budget == 0 {
                        self.diags.push(Diagnostic::error(
                            format!("loop unrolling exceeds the limit of {} iterations", self.max_unroll),
                            *span,
                        ));
                        return;
                    }
                    self.budget -= 1;
                    scope.vars.push((var.clone(), i));
                    self.body(body, scope, out);
                    scope.vars.pop();
                    let Some(next) = i.checked_add(step) else { break };
                    i = next;
                }
            }
            Stmt::Call { module, args, span } => out.push(Stmt::Call {
                module: module.clone(),
                args: args.clone(),
                span: *span,
            }),
            Stmt::Uncall { module, args, span } => out.push(Stmt::Uncall {
                module: module.clone(),
                args: args.clone(),
                span: *span,
            }),
        }
    }

    fn number(&mut self, n: &Number, scope: &Scope<'_>, span: Span) -> Option<i64> {
        let v = match n {
            Number::Lit(v) => i64::try_from(*v).ok(),
            Number::LoopVar(name) => match scope.var(name) {
                Some(v) => Some(v),
                None => {
                    self.diags
                        .push(Diagnostic::error(format!("unknown loop variable '${name}'"), span));
                    return None;
                }
            },
            Number::WidthOf(name) => match scope.widths.get(name.as_str()) {
                Some(w) => Some(i64::from(*w)),
                None => {
                    self.diags.push(Diagnostic::error(format!("unknown signal '{name}'"), span));
                    return None;
                }
            },
            Number::Neg(inner) => self.number(inner, scope, span)?.checked_neg(),
            Number::Binary(op, a, b) => {
                let a = self.number(a, scope, span)?;
                let b = self.number(b, scope, span)?;
                match op {
                    NumOp::Add => a.checked_add(b),
                    NumOp::Sub => a.checked_sub(b),
                }
            }
        };
        if v.is_none() {
            self.diags.push(Diagnostic::error("integer overflow in constant expression", span));
        }
        v
    }

    /// Evaluates a compile-time number that must be non-negative.
    fn natural(&mut self, n: &Number, scope: &Scope<'_>, span: Span) -> Option<u64> {
        let v = self.number(n, scope, span)?;
        match u64::try_from(v) {
            Ok(v) => Some(v),
            Err(_) => {
                self.diags
                    .push(Diagnostic::error(format!("negative value {v} where a bit index or amount is required"), span));
                None
            }
        }
    }

    fn access(&mut self, a: &Access, scope: &Scope<'_>) -> Option<Access> {
        let selector = match &a.selector {
            Selector::Whole => Selector::Whole,
            Selector::Bit(i) => Selector::Bit(Number::Lit(self.natural(i, scope, a.span)?)),
            Selector::Range(x, y) => Selector::Range(
                Number::Lit(self.natural(x, scope, a.span)?),
                Number::Lit(self.natural(y, scope, a.span)?),
            ),
        };
        Some(Access {
            name: a.name.clone(),
            selector,
            span: a.span,
        })
    }

    fn expr(&mut self, e: &Expr, expected: Option<u32>, scope: &Scope<'_>) -> Option<Expr> {
        Some(match e {
            Expr::Const(v) => Expr::Const(*v),
            Expr::LoopVar(name) => {
                Expr::Const(self.natural(&Number::LoopVar(name.clone()), scope, Span::default())?)
            }
            Expr::WidthOf(name) => {
                Expr::Const(self.natural(&Number::WidthOf(name.clone()), scope, Span::default())?)
            }
            Expr::Signal(a) => Expr::Signal(self.access(a, scope)?),
            Expr::Shift { op, operand, amount } => {
                let span = Span::default();
                let amount = self.natural(amount, scope, span)?;
                let operand = self.expr(operand, expected, scope)?;
                match (&operand, width_in(&operand, expected, scope)) {
                    (Expr::Const(v), Some(w)) => Expr::Const(op.apply(*v, amount, w)),
                    _ => Expr::Shift {
                        op: *op,
                        operand: Box::new(operand),
                        amount: Number::Lit(amount),
                    },
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let operand_ctx = if op.is_logical() {
                    Some(1)
                } else if op.is_comparison() {
                    None
                } else {
                    expected
                };
                let sw = |n: &str| scope.widths.get(n).copied();
                let hint = if op.is_logical() {
                    Some(1)
                } else {
                    infer_width(lhs, &sw, operand_ctx).or_else(|| infer_width(rhs, &sw, operand_ctx))
                };
                let l = self.expr(lhs, hint, scope)?;
                let r = self.expr(rhs, hint, scope)?;
                match (&l, &r) {
                    (Expr::Const(a), Expr::Const(b)) => {
                        Expr::Const(op.apply(*a, *b, hint.unwrap_or(64)))
                    }
                    _ => Expr::binary(*op, l, r),
                }
            }
        })
    }
}

fn width_in(e: &Expr, expected: Option<u32>, scope: &Scope<'_>) -> Option<u32> {
    infer_width(e, &|n: &str| scope.widths.get(n).copied(), expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{analyze, parse};

    fn elab(src: &str) -> Result<ElaboratedProgram, Diagnostics> {
        let checked = analyze(parse(src).unwrap())?;
        elaborate(&checked, &ElabSettings::default())
    }

    fn body(src: &str) -> Vec<String> {
        elab(src).unwrap().entry().body.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unrolls_two_iterations() {
        assert_eq!(
            body("module m(inout a(2)) for $i = 0 to 1 do ++= a rof"),
            vec!["++= a", "++= a"]
        );
    }

    #[test]
    fn folds_constants_at_target_width() {
        assert_eq!(body("module m(inout a(4)) a ^= (2 + 3)"), vec!["a ^= 5"]);
        assert_eq!(body("module m(inout a(2)) a ^= (3 + 3)"), vec!["a ^= 2"]);
    }

    #[test]
    fn inclusive_bounds_with_width_query() {
        assert_eq!(
            body("module m(inout x(2)) for $i = 0 to #x do skip rof"),
            vec!["skip", "skip", "skip"]
        );
    }

    #[test]
    fn negative_step_counts_down() {
        assert_eq!(
            body("module m(inout a(4), in b(1)) for $i = 3 to 1 step -1 do a.$i ^= b rof"),
            vec!["a.3 ^= b", "a.2 ^= b", "a.1 ^= b"]
        );
    }

    #[test]
    fn substitutes_loop_vars_in_expressions_and_indices() {
        assert_eq!(
            body("module m(inout a(4), in b(4)) for $i = 1 to 2 do a ^= ((b << $i) + ($i + 1)) rof"),
            vec!["a ^= ((b << 1) + 2)", "a ^= ((b << 2) + 3)"]
        );
    }

    #[test]
    fn default_widths_are_made_explicit() {
        let e = elab("module m(inout a) ++= a").unwrap();
        assert_eq!(e.entry().params[0].width, Some(32));
    }

    #[test]
    fn step_zero_is_rejected() {
        let err = elab("module m(inout a(2)) for $i = 0 to 1 step 0 do skip rof").unwrap_err();
        assert_eq!(err.0[0].message, "loop step must not be 0");
    }

    #[test]
    fn unroll_limit() {
        let checked = analyze(parse("module m(inout a(2)) for $i = 0 to 10 do skip rof").unwrap()).unwrap();
        let settings = ElabSettings {
            max_unroll: 5,
            ..ElabSettings::default()
        };
        let err = elaborate(&checked, &settings).unwrap_err();
        assert!(err.0[0].message.contains("limit of 5"));
    }

    #[test]
    fn overlap_detected_after_substitution() {
        let err = elab("module m(inout a(4)) for $i = 0 to 1 do a.$i ^= a.($i + 0) rof").unwrap_err();
        assert_eq!(err.0[0].message, "assignment target read on right-hand side");
    }

    #[test]
    fn index_out_of_range_after_substitution() {
        let err = elab("module m(inout a(2), in b(1)) for $i = 0 to 2 do a.$i ^= b rof").unwrap_err();
        assert!(err.0[0].message.contains("out of range"));
    }

    #[test]
    fn fi_condition_must_match() {
        let err = elab("module m(in c(1), in d(1), inout a(1)) if c then ~= a else skip fi d").unwrap_err();
        assert!(err.0[0].message.starts_with("fi-condition"));
        assert!(elab("module m(inout x(2), inout a(1)) if (x = #x) then ~= a else skip fi (x = 2)").is_ok());
    }

    #[test]
    fn idempotent_on_alu() {
        let once = elab(crate::ALU_SOURCE).unwrap();
        let again = elaborate(&analyze(once.program().clone()).unwrap(), &ElabSettings::default()).unwrap();
        assert_eq!(once, again);
    }
}
