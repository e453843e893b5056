//! Static semantics: name resolution, width checking and the
//! reversibility restrictions on statements.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::*;
use super::diag::{Diagnostic, Diagnostics, Span};
use super::ElabSettings;

/// Widest signal the value-level machinery supports.
pub const MAX_WIDTH: u32 = 64;

/// A program that passed [`analyze`]. Warnings are kept for reporting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckedProgram {
    pub program: Program,
    pub warnings: Vec<Diagnostic>,
    pub(crate) default_width: u32,
}

impl CheckedProgram {
    pub fn program(&self) -> &Program {
        &self.program
    }
}

/// Checks `program` with default settings.
pub fn analyze(program: Program) -> Result<CheckedProgram, Diagnostics> {
    analyze_with(program, &ElabSettings::default())
}

pub fn analyze_with(program: Program, settings: &ElabSettings) -> Result<CheckedProgram, Diagnostics> {
    let diags = check_program(&program, settings.default_width, false);
    finish(program, diags, settings.default_width)
}

pub(crate) fn finish(
    program: Program,
    diags: Vec<Diagnostic>,
    default_width: u32,
) -> Result<CheckedProgram, Diagnostics> {
    if diags.iter().any(Diagnostic::is_error) {
        Err(Diagnostics(diags))
    } else {
        Ok(CheckedProgram {
            program,
            warnings: diags,
            default_width,
        })
    }
}

/// Runs every check and returns all diagnostics. With `elaborated` set,
/// the if/fi condition identity rule is enforced as well.
pub(crate) fn check_program(program: &Program, default_width: u32, elaborated: bool) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if program.modules.is_empty() {
        diags.push(Diagnostic::error("program declares no module", Span::default()));
        return diags;
    }
    if !(1..=MAX_WIDTH).contains(&default_width) {
        diags.push(Diagnostic::error(
            format!("default width {default_width} is outside 1..={MAX_WIDTH}"),
            Span::default(),
        ));
        return diags;
    }
    let mut seen = HashSet::new();
    for (index, module) in program.modules.iter().enumerate() {
        if !seen.insert(module.name.as_str()) {
            diags.push(Diagnostic::error(
                format!("duplicate module '{}'", module.name),
                module.span,
            ));
        }
        let mut checker = ModuleChecker {
            program,
            index,
            default_width,
            elaborated,
            signals: HashMap::new(),
            loop_vars: Vec::new(),
            diags: &mut diags,
        };
        checker.check_module(module);
    }
    diags
}

#[derive(Clone, Copy)]
struct SignalInfo {
    kind: SignalKind,
    width: u32,
}

struct ModuleChecker<'a> {
    program: &'a Program,
    index: usize,
    default_width: u32,
    elaborated: bool,
    signals: HashMap<&'a str, SignalInfo>,
    loop_vars: Vec<&'a str>,
    diags: &'a mut Vec<Diagnostic>,
}

impl<'a> ModuleChecker<'a> {
    fn error(&mut self, message: impl Into<String>, span: Span) {
        self.diags.push(Diagnostic::error(message, span));
    }

    fn resolve_width(&mut self, width: Option<u32>, span: Span) -> u32 {
        let w = width.unwrap_or(self.default_width);
        if w == 0 {
            self.error("signal width must be at least 1", span);
            1
        } else if w > MAX_WIDTH {
            self.error(
                format!("width {w} exceeds the supported maximum of {MAX_WIDTH}"),
                span,
            );
            MAX_WIDTH
        } else {
            w
        }
    }

    fn check_module(&mut self, module: &'a Module) {
        for p in &module.params {
            let width = self.resolve_width(p.width, p.span);
            self.declare(&p.name, p.direction.into(), width, p.span);
        }
        for l in &module.locals {
            let width = self.resolve_width(l.width, l.span);
            self.declare(&l.name, l.kind.into(), width, l.span);
        }
        self.check_body(&module.body);
    }

    fn declare(&mut self, name: &'a str, kind: SignalKind, width: u32, span: Span) {
        if self.signals.insert(name, SignalInfo { kind, width }).is_some() {
            self.error(format!("duplicate signal '{name}'"), span);
        }
    }

    fn check_body(&mut self, body: &'a [Stmt]) {
        for s in body {
            self.check_stmt(s);
        }
    }

    fn signal_width(&self) -> impl Fn(&str) -> Option<u32> + '_ {
        |name| self.signals.get(name).map(|s| s.width)
    }

    fn check_stmt(&mut self, stmt: &'a Stmt) {
        match stmt {
            Stmt::Skip { .. } => {}
            Stmt::Swap { lhs, rhs, span } => {
                let wl = self.check_access(lhs, true);
                let wr = self.check_access(rhs, true);
                if let (Some(a), Some(b)) = (wl, wr) {
                    if a != b {
                        self.error(format!("swap width mismatch {a} vs {b}"), *span);
                    }
                }
                if let (Some(a), Some(b)) = (self.bits(lhs), self.bits(rhs)) {
                    if !a.is_disjoint(&b) {
                        self.error("swap operands overlap", *span);
                    }
                }
            }
            Stmt::Unary { target, .. } => {
                self.check_access(target, true);
            }
            Stmt::Assign { lhs, rhs, span, .. } => {
                let wl = self.check_access(lhs, true);
                let wr = self.check_expr(rhs, wl);
                if let (Some(a), Some(b)) = (wl, wr) {
                    if a != b {
                        self.error(
                            format!("width mismatch: target has {a} bits, expression has {b}"),
                            *span,
                        );
                    }
                }
                if let (Some(target), Some(read)) = (self.bits(lhs), self.expr_bits(rhs)) {
                    if !target.is_disjoint(&read) {
                        self.error("assignment target read on right-hand side", *span);
                    }
                }
            }
            Stmt::If {
                cond,
                then_body,
                else_body,
                fi_cond,
                span,
            } => {
                self.check_condition(cond);
                self.check_body(then_body);
                self.check_body(else_body);
                self.check_condition(fi_cond);
                if self.elaborated && cond != fi_cond {
                    self.error(
                        format!("fi-condition ({fi_cond}) must repeat the if-condition ({cond})"),
                        *span,
                    );
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
                if self.elaborated {
                    self.error("loop survived elaboration", *span);
                }
                self.check_number(from, *span);
                self.check_number(to, *span);
                if let Some(step) = step {
                    self.check_number(step, *span);
                    if step.as_lit() == Some(0) {
                        self.error("loop step must not be 0", *span);
                    }
                }
                self.loop_vars.push(var);
                self.check_body(body);
                self.loop_vars.pop();
            }
            Stmt::Call { module, args, span } | Stmt::Uncall { module, args, span } => {
                self.check_call(module, args, *span);
            }
        }
    }

    fn check_condition(&mut self, cond: &'a Expr) {
        if let Some(w) = self.check_expr(cond, Some(1)) {
            if w != 1 {
                self.error(
                    format!("condition must be 1 bit wide, found {w} bits"),
                    expr_span(cond),
                );
            }
        }
    }

    fn check_call(&mut self, name: &str, args: &[String], span: Span) {
        let callee = self.program.modules[..self.index]
            .iter()
            .rev()
            .find(|m| m.name == name);
        let Some(callee) = callee else {
            let msg = if self.program.modules[self.index].name == name {
                format!("recursive call of module '{name}'")
            } else {
                format!("call to undeclared module '{name}'")
            };
            self.error(msg, span);
            return;
        };
        if callee.params.len() != args.len() {
            self.error(
                format!(
                    "module '{name}' expects {} arguments, found {}",
                    callee.params.len(),
                    args.len()
                ),
                span,
            );
        }
        let mut used = HashSet::new();
        for arg in args {
            if !used.insert(arg.as_str()) {
                self.error(format!("signal '{arg}' passed more than once"), span);
            }
        }
        for (param, arg) in callee.params.iter().zip(args) {
            let Some(info) = self.signals.get(arg.as_str()).copied() else {
                self.error(format!("unknown signal '{arg}'"), span);
                continue;
            };
            let pw = param.width.unwrap_or(self.default_width);
            if pw != info.width {
                self.error(
                    format!(
                        "argument '{arg}' has {} bits, parameter '{}' expects {pw}",
                        info.width, param.name
                    ),
                    span,
                );
            }
            if param.direction != Direction::In && !info.kind.is_writable() {
                self.error(
                    format!("cannot pass input signal '{arg}' to {} parameter '{}'", param.direction.keyword(), param.name),
                    span,
                );
            }
        }
    }

    fn check_number(&mut self, n: &Number, span: Span) {
        match n {
            Number::Lit(_) => {}
            Number::LoopVar(v) => {
                if !self.loop_vars.contains(&v.as_str()) {
                    self.error(format!("unknown loop variable '${v}'"), span);
                }
            }
            Number::WidthOf(s) => {
                if !self.signals.contains_key(s.as_str()) {
                    self.error(format!("unknown signal '{s}'"), span);
                }
            }
            Number::Neg(inner) => self.check_number(inner, span),
            Number::Binary(_, a, b) => {
                self.check_number(a, span);
                self.check_number(b, span);
            }
        }
    }

    /// Validates an access and returns its width when known.
    fn check_access(&mut self, access: &Access, write: bool) -> Option<u32> {
        let Some(info) = self.signals.get(access.name.as_str()).copied() else {
            self.error(format!("unknown signal '{}'", access.name), access.span);
            return None;
        };
        if write && !info.kind.is_writable() {
            self.error(
                format!("cannot write to input signal '{}'", access.name),
                access.span,
            );
        }
        let indices: Vec<&Number> = match &access.selector {
            Selector::Whole => vec![],
            Selector::Bit(i) => vec![i],
            Selector::Range(a, b) => vec![a, b],
        };
        for n in indices {
            self.check_number(n, access.span);
            if let Some(i) = n.as_lit() {
                if i >= u64::from(info.width) {
                    self.error(
                        format!(
                            "bit index {i} out of range for signal '{}' of width {}",
                            access.name, info.width
                        ),
                        access.span,
                    );
                }
            }
        }
        access.width(info.width)
    }

    fn check_expr(&mut self, expr: &Expr, expected: Option<u32>) -> Option<u32> {
        match expr {
            Expr::Const(v) => {
                if let Some(w) = expected {
                    if *v > mask(w) {
                        self.diags.push(Diagnostic::warning(
                            format!("literal {v} does not fit in {w} bits and is truncated"),
                            Span::default(),
                        ));
                    }
                }
                expected
            }
            Expr::LoopVar(v) => {
                if !self.loop_vars.contains(&v.as_str()) {
                    self.error(format!("unknown loop variable '${v}'"), Span::default());
                }
                expected
            }
            Expr::WidthOf(s) => {
                if !self.signals.contains_key(s.as_str()) {
                    self.error(format!("unknown signal '{s}'"), Span::default());
                }
                expected
            }
            Expr::Signal(a) => self.check_access(a, false),
            Expr::Shift { operand, amount, .. } => {
                self.check_number(amount, expr_span(operand));
                self.check_expr(operand, expected)
            }
            Expr::Binary { op, lhs, rhs } if op.is_logical() => {
                for side in [lhs, rhs] {
                    if let Some(w) = self.check_expr(side, Some(1)) {
                        if w != 1 {
                            self.error(
                                format!("operand of '{}' must be 1 bit wide, found {w} bits", op.symbol()),
                                expr_span(side),
                            );
                        }
                    }
                }
                Some(1)
            }
            Expr::Binary { op, lhs, rhs } => {
                let ctx = if op.is_comparison() { None } else { expected };
                let hint = {
                    let sw = self.signal_width();
                    infer_width(lhs, &sw, ctx).or_else(|| infer_width(rhs, &sw, ctx))
                };
                let wl = self.check_expr(lhs, hint);
                let wr = self.check_expr(rhs, hint);
                if let (Some(a), Some(b)) = (wl, wr) {
                    if a != b {
                        self.error(
                            format!("operand width mismatch in '{}': {a} vs {b}", op.symbol()),
                            expr_span(expr),
                        );
                    }
                }
                if op.is_comparison() {
                    Some(1)
                } else {
                    wl.or(wr)
                }
            }
        }
    }

    fn bits(&self, access: &Access) -> Option<BTreeSet<(String, u32)>> {
        let info = self.signals.get(access.name.as_str())?;
        let idx = access.bit_indices(info.width)?;
        Some(idx.into_iter().map(|i| (access.name.clone(), i)).collect())
    }

    /// Bits read by `expr`; `None` if some index is not yet known.
    fn expr_bits(&self, expr: &Expr) -> Option<BTreeSet<(String, u32)>> {
        let mut all = Some(BTreeSet::new());
        expr.for_each_access(&mut |a| {
            let bits = self.bits(a);
            match (&mut all, bits) {
                (Some(set), Some(b)) => set.extend(b),
                _ => all = None,
            }
        });
        all
    }
}

/// Best-effort location of an expression.
fn expr_span(expr: &Expr) -> Span {
    let mut span = None;
    expr.for_each_access(&mut |a| {
        span.get_or_insert(a.span);
    });
    span.unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    fn errors(src: &str) -> Vec<String> {
        match analyze(parse(src).unwrap()) {
            Ok(_) => vec![],
            Err(d) => d.errors().map(|d| d.message.clone()).collect(),
        }
    }

    #[test]
    fn alu_is_accepted() {
        assert!(errors(crate::ALU_SOURCE).is_empty());
    }

    #[test]
    fn target_read_on_rhs() {
        assert_eq!(
            errors("module m(inout a(2)) a ^= (a >> 1)"),
            vec!["assignment target read on right-hand side"]
        );
    }

    #[test]
    fn swap_width_mismatch() {
        assert_eq!(
            errors("module m(inout a(2), inout b(3)) a <=> b"),
            vec!["swap width mismatch 2 vs 3"]
        );
    }

    #[test]
    fn input_is_not_writable_and_all_errors_reported() {
        let errs = errors("module m(in a(2)) a += a");
        assert_eq!(
            errs,
            vec![
                "cannot write to input signal 'a'",
                "assignment target read on right-hand side"
            ]
        );
    }

    #[test]
    fn distinct_bits_of_same_signal_are_fine() {
        assert!(errors("module m(inout a(2)) a.0 ^= a.1").is_empty());
        assert_eq!(
            errors("module m(inout a(2)) a.0:1 ^= (a.1 + a.1)").len(),
            2,
            "width and overlap"
        );
    }

    #[test]
    fn call_rules() {
        let src = "module f(inout x(2))\n ++= x\nmodule main(inout a(2), in b(2), inout c(3))\n call f(b); call f(c); call g(a); call main(a); call f(a, a)";
        let errs = errors(src);
        assert_eq!(
            errs,
            vec![
                "cannot pass input signal 'b' to inout parameter 'x'",
                "argument 'c' has 3 bits, parameter 'x' expects 2",
                "call to undeclared module 'g'",
                "recursive call of module 'main'",
                "module 'f' expects 1 arguments, found 2",
                "signal 'a' passed more than once",
            ]
        );
    }

    #[test]
    fn condition_width() {
        assert_eq!(
            errors("module m(in c(2), inout a(1)) if c then ~= a else skip fi c"),
            vec![
                "condition must be 1 bit wide, found 2 bits",
                "condition must be 1 bit wide, found 2 bits"
            ]
        );
    }

    #[test]
    fn unknown_names() {
        let errs = errors("module m(inout a(2)) a ^= (b + $i); a.5 ^= 1");
        assert_eq!(
            errs,
            vec![
                "unknown signal 'b'",
                "unknown loop variable '$i'",
                "bit index 5 out of range for signal 'a' of width 2"
            ]
        );
    }

    #[test]
    fn duplicate_declarations_and_widths() {
        let errs = errors("module m(inout a(2), in a(0)) skip\nmodule m(inout w(65)) skip");
        assert_eq!(
            errs,
            vec![
                "signal width must be at least 1",
                "duplicate signal 'a'",
                "duplicate module 'm'",
                "width 65 exceeds the supported maximum of 64"
            ]
        );
    }

    #[test]
    fn oversized_literal_warns() {
        let checked = analyze(parse("module m(inout a(2)) a ^= 7").unwrap()).unwrap();
        assert_eq!(checked.warnings.len(), 1);
    }

    #[test]
    fn empty_program() {
        assert_eq!(errors(""), vec!["program declares no module"]);
    }
}
