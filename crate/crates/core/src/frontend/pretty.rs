//! Canonical source rendering. The output re-parses to an equal tree.

use std::fmt::{self, Write};

use super::ast::*;

const INDENT: &str = "  ";

pub(crate) fn write_program(f: &mut fmt::Formatter<'_>, program: &Program) -> fmt::Result {
    for (i, m) in program.modules.iter().enumerate() {
        if i > 0 {
            writeln!(f)?;
        }
        write_module(f, m)?;
    }
    Ok(())
}

fn write_width(f: &mut impl Write, width: Option<u32>) -> fmt::Result {
    match width {
        Some(w) => write!(f, "({w})"),
        None => Ok(()),
    }
}

fn write_module(f: &mut fmt::Formatter<'_>, m: &Module) -> fmt::Result {
    write!(f, "module {}(", m.name)?;
    for (i, p) in m.params.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{} {}", p.direction.keyword(), p.name)?;
        write_width(f, p.width)?;
    }
    writeln!(f, ")")?;
    for l in &m.locals {
        write!(f, "{INDENT}{} {}", l.kind.keyword(), l.name)?;
        write_width(f, l.width)?;
        writeln!(f)?;
    }
    write_block(f, &m.body, 1)
}

fn write_block(f: &mut fmt::Formatter<'_>, body: &[Stmt], depth: usize) -> fmt::Result {
    for (i, s) in body.iter().enumerate() {
        write_stmt(f, s, depth)?;
        if i + 1 < body.len() {
            f.write_str(";")?;
        }
        writeln!(f)?;
    }
    Ok(())
}

fn indent(f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
    for _ in 0..depth {
        f.write_str(INDENT)?;
    }
    Ok(())
}

fn write_stmt(f: &mut fmt::Formatter<'_>, s: &Stmt, depth: usize) -> fmt::Result {
    indent(f, depth)?;
    match s {
        Stmt::If {
            cond,
            then_body,
            else_body,
            fi_cond,
            ..
        } => {
            writeln!(f, "if ({cond}) then")?;
            write_block(f, then_body, depth + 1)?;
            indent(f, depth)?;
            writeln!(f, "else")?;
            write_block(f, else_body, depth + 1)?;
            indent(f, depth)?;
            write!(f, "fi ({fi_cond})")
        }
        Stmt::For {
            var,
            from,
            to,
            step,
            body,
            ..
        } => {
            write!(f, "for ${var} = {from} to {to}")?;
            if let Some(step) = step {
                write!(f, " step {step}")?;
            }
            writeln!(f, " do")?;
            write_block(f, body, depth + 1)?;
            indent(f, depth)?;
            write!(f, "rof")
        }
        other => write_stmt_inline(f, other),
    }
}

/// Single-line rendering, used for traces and diagnostics.
pub(crate) fn write_stmt_inline(f: &mut impl Write, s: &Stmt) -> fmt::Result {
    match s {
        Stmt::Skip { .. } => f.write_str("skip"),
        Stmt::Swap { lhs, rhs, .. } => write!(f, "{lhs} <=> {rhs}"),
        Stmt::Unary { op, target, .. } => write!(f, "{} {target}", op.symbol()),
        Stmt::Assign { op, lhs, rhs, .. } => write!(f, "{lhs} {} {rhs}", op.symbol()),
        Stmt::If {
            cond,
            then_body,
            else_body,
            fi_cond,
            ..
        } => {
            write!(f, "if ({cond}) then ")?;
            write_inline_block(f, then_body)?;
            f.write_str(" else ")?;
            write_inline_block(f, else_body)?;
            write!(f, " fi ({fi_cond})")
        }
        Stmt::For {
            var,
            from,
            to,
            step,
            body,
            ..
        } => {
            write!(f, "for ${var} = {from} to {to}")?;
            if let Some(step) = step {
                write!(f, " step {step}")?;
            }
            f.write_str(" do ")?;
            write_inline_block(f, body)?;
            f.write_str(" rof")
        }
        Stmt::Call { module, args, .. } => write!(f, "call {module}({})", args.join(", ")),
        Stmt::Uncall { module, args, .. } => write!(f, "uncall {module}({})", args.join(", ")),
    }
}

fn write_inline_block(f: &mut impl Write, body: &[Stmt]) -> fmt::Result {
    for (i, s) in body.iter().enumerate() {
        if i > 0 {
            f.write_str("; ")?;
        }
        write_stmt_inline(f, s)?;
    }
    Ok(())
}

pub(crate) fn write_expr(f: &mut impl Write, e: &Expr) -> fmt::Result {
    match e {
        Expr::Const(v) => write!(f, "{v}"),
        Expr::Signal(a) => write_access(f, a),
        Expr::Binary { op, lhs, rhs } => {
            f.write_char('(')?;
            write_expr(f, lhs)?;
            write!(f, " {} ", op.symbol())?;
            write_expr(f, rhs)?;
            f.write_char(')')
        }
        Expr::Shift {
            op,
            operand,
            amount,
        } => {
            f.write_char('(')?;
            write_expr(f, operand)?;
            write!(f, " {} ", op.symbol())?;
            write_number(f, amount)?;
            f.write_char(')')
        }
        Expr::WidthOf(name) => write!(f, "#{name}"),
        Expr::LoopVar(name) => write!(f, "${name}"),
    }
}

pub(crate) fn write_access(f: &mut impl Write, a: &Access) -> fmt::Result {
    f.write_str(&a.name)?;
    match &a.selector {
        Selector::Whole => Ok(()),
        Selector::Bit(i) => {
            f.write_char('.')?;
            write_number(f, i)
        }
        Selector::Range(lo, hi) => {
            f.write_char('.')?;
            write_number(f, lo)?;
            f.write_char(':')?;
            write_number(f, hi)
        }
    }
}

pub(crate) fn write_number(f: &mut impl Write, n: &Number) -> fmt::Result {
    match n {
        Number::Lit(v) => write!(f, "{v}"),
        Number::LoopVar(name) => write!(f, "${name}"),
        Number::WidthOf(name) => write!(f, "#{name}"),
        Number::Neg(inner) => {
            f.write_char('-')?;
            write_number(f, inner)
        }
        Number::Binary(op, a, b) => {
            f.write_char('(')?;
            write_number(f, a)?;
            f.write_str(match op {
                NumOp::Add => " + ",
                NumOp::Sub => " - ",
            })?;
            write_number(f, b)?;
            f.write_char(')')
        }
    }
}
