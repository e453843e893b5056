//! Abstract syntax of SyReC programs.
//!
//! The same tree is used before and after elaboration. Elaborated trees
//! contain no `for` loops, no loop variables, no `#x` width queries, and
//! every width and index is a literal.

use std::fmt;

use super::diag::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub modules: Vec<Module>,
}

impl Program {
    pub fn module(&self, name: &str) -> Option<&Module> {
        self.modules.iter().find(|m| m.name == name)
    }

    /// The top-level module: `main` if declared, otherwise the last module.
    pub fn entry(&self) -> Option<&Module> {
        self.module("main").or_else(|| self.modules.last())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Module {
    pub name: String,
    pub params: Vec<Param>,
    pub locals: Vec<Local>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

impl Module {
    /// Every declared signal of the module, parameters first.
    pub fn signals(&self) -> impl Iterator<Item = SignalDecl<'_>> {
        self.params
            .iter()
            .map(|p| SignalDecl {
                name: &p.name,
                kind: p.direction.into(),
                width: p.width,
            })
            .chain(self.locals.iter().map(|l| SignalDecl {
                name: &l.name,
                kind: l.kind.into(),
                width: l.width,
            }))
    }

    pub fn signal(&self, name: &str) -> Option<SignalDecl<'_>> {
        self.signals().find(|s| s.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    In,
    Out,
    Inout,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
            Direction::Inout => "inout",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub direction: Direction,
    pub name: String,
    /// `None` when omitted in source; filled in by elaboration.
    pub width: Option<u32>,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalKind {
    Wire,
    State,
}

impl LocalKind {
    pub fn keyword(self) -> &'static str {
        match self {
            LocalKind::Wire => "wire",
            LocalKind::State => "state",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Local {
    pub kind: LocalKind,
    pub name: String,
    pub width: Option<u32>,
    pub span: Span,
}

/// Role of a declared signal, unified over parameters and locals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    In,
    Out,
    Inout,
    Wire,
    State,
}

impl SignalKind {
    pub fn is_writable(self) -> bool {
        self != SignalKind::In
    }

    /// Initial value supplied by the environment rather than zero.
    pub fn is_primary_input(self) -> bool {
        matches!(self, SignalKind::In | SignalKind::Inout | SignalKind::State)
    }

    /// Final value is a declared result.
    pub fn is_output(self) -> bool {
        matches!(self, SignalKind::Out | SignalKind::Inout | SignalKind::State)
    }
}

impl From<Direction> for SignalKind {
    fn from(d: Direction) -> Self {
        match d {
            Direction::In => SignalKind::In,
            Direction::Out => SignalKind::Out,
            Direction::Inout => SignalKind::Inout,
        }
    }
}

impl From<LocalKind> for SignalKind {
    fn from(k: LocalKind) -> Self {
        match k {
            LocalKind::Wire => SignalKind::Wire,
            LocalKind::State => SignalKind::State,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SignalDecl<'a> {
    pub name: &'a str,
    pub kind: SignalKind,
    pub width: Option<u32>,
}

/// Compile-time integer: bounds, steps, shift amounts and bit indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Number {
    Lit(u64),
    LoopVar(String),
    WidthOf(String),
    Neg(Box<Number>),
    Binary(NumOp, Box<Number>, Box<Number>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NumOp {
    Add,
    Sub,
}

impl Number {
    pub fn as_lit(&self) -> Option<u64> {
        match self {
            Number::Lit(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    Whole,
    Bit(Number),
    Range(Number, Number),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Access {
    pub name: String,
    pub selector: Selector,
    pub span: Span,
}

impl Access {
    pub fn whole(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            selector: Selector::Whole,
            span: Span::default(),
        }
    }

    /// Bit indices selected from a signal of width `width`, LSB first.
    /// `None` while an index is not yet a literal.
    pub fn bit_indices(&self, width: u32) -> Option<Vec<u32>> {
        match &self.selector {
            Selector::Whole => Some((0..width).collect()),
            Selector::Bit(i) => Some(vec![u32::try_from(i.as_lit()?).ok()?]),
            Selector::Range(a, b) => {
                let a = u32::try_from(a.as_lit()?).ok()?;
                let b = u32::try_from(b.as_lit()?).ok()?;
                if a <= b {
                    Some((a..=b).collect())
                } else {
                    Some((b..=a).rev().collect())
                }
            }
        }
    }

    /// Width of the selected slice, if known.
    pub fn width(&self, signal_width: u32) -> Option<u32> {
        match &self.selector {
            Selector::Whole => Some(signal_width),
            Selector::Bit(_) => Some(1),
            Selector::Range(a, b) => {
                let (a, b) = (a.as_lit()?, b.as_lit()?);
                u32::try_from(a.abs_diff(b) + 1).ok()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Xor,
    And,
    Or,
    Lt,
    Gt,
    Eq,
    Ne,
    Le,
    Ge,
    LogicAnd,
    LogicOr,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Xor => "^",
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::LogicAnd => "&&",
            BinOp::LogicOr => "||",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Gt | BinOp::Eq | BinOp::Ne | BinOp::Le | BinOp::Ge
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::LogicAnd | BinOp::LogicOr)
    }

    /// Result width is 1 regardless of operand width.
    pub fn yields_bit(self) -> bool {
        self.is_comparison() || self.is_logical()
    }

    /// `+`, `-` and `^` can be undone given the other operand.
    pub fn is_invertible(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Xor)
    }

    /// Evaluates the operator on `width`-bit operands.
    pub fn apply(self, a: u64, b: u64, width: u32) -> u64 {
        let m = mask(width);
        let v = match self {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Xor => a ^ b,
            BinOp::And => a & b,
            BinOp::Or => a | b,
            BinOp::Lt => (a < b) as u64,
            BinOp::Gt => (a > b) as u64,
            BinOp::Eq => (a == b) as u64,
            BinOp::Ne => (a != b) as u64,
            BinOp::Le => (a <= b) as u64,
            BinOp::Ge => (a >= b) as u64,
            BinOp::LogicAnd => (a != 0 && b != 0) as u64,
            BinOp::LogicOr => (a != 0 || b != 0) as u64,
        };
        v & m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShiftOp {
    Left,
    Right,
}

impl ShiftOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ShiftOp::Left => "<<",
            ShiftOp::Right => ">>",
        }
    }

    /// Logical shift with zero fill; amounts of `width` or more yield 0.
    pub fn apply(self, value: u64, amount: u64, width: u32) -> u64 {
        if amount >= u64::from(width) {
            return 0;
        }
        let v = match self {
            ShiftOp::Left => value << amount,
            ShiftOp::Right => value >> amount,
        };
        v & mask(width)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Literal; its width is taken from the surrounding context.
    Const(u64),
    Signal(Access),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Shift {
        op: ShiftOp,
        operand: Box<Expr>,
        amount: Number,
    },
    WidthOf(String),
    LoopVar(String),
}

impl Expr {
    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn signal(name: &str) -> Self {
        Expr::Signal(Access::whole(name))
    }

    /// Visits every signal access read by the expression.
    pub fn for_each_access<'a>(&'a self, f: &mut impl FnMut(&'a Access)) {
        match self {
            Expr::Signal(a) => f(a),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.for_each_access(f);
                rhs.for_each_access(f);
            }
            Expr::Shift { operand, .. } => operand.for_each_access(f),
            Expr::Const(_) | Expr::WidthOf(_) | Expr::LoopVar(_) => {}
        }
    }

    /// True for expressions whose value does not depend on any signal.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::WidthOf(_) | Expr::LoopVar(_) => true,
            Expr::Signal(_) => false,
            Expr::Binary { lhs, rhs, .. } => lhs.is_constant() && rhs.is_constant(),
            Expr::Shift { operand, .. } => operand.is_constant(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Invert,
    Increment,
    Decrement,
}

impl UnaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnaryOp::Invert => "~=",
            UnaryOp::Increment => "++=",
            UnaryOp::Decrement => "--=",
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            UnaryOp::Invert => UnaryOp::Invert,
            UnaryOp::Increment => UnaryOp::Decrement,
            UnaryOp::Decrement => UnaryOp::Increment,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Xor,
    Add,
    Sub,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Xor => "^=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            AssignOp::Xor => AssignOp::Xor,
            AssignOp::Add => AssignOp::Sub,
            AssignOp::Sub => AssignOp::Add,
        }
    }

    pub fn apply(self, target: u64, value: u64, width: u32) -> u64 {
        let v = match self {
            AssignOp::Xor => target ^ value,
            AssignOp::Add => target.wrapping_add(value),
            AssignOp::Sub => target.wrapping_sub(value),
        };
        v & mask(width)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Skip {
        span: Span,
    },
    Swap {
        lhs: Access,
        rhs: Access,
        span: Span,
    },
    Unary {
        op: UnaryOp,
        target: Access,
        span: Span,
    },
    Assign {
        op: AssignOp,
        lhs: Access,
        rhs: Expr,
        span: Span,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
        fi_cond: Expr,
        span: Span,
    },
    For {
        var: String,
        from: Number,
        to: Number,
        step: Option<Number>,
        body: Vec<Stmt>,
        span: Span,
    },
    Call {
        module: String,
        args: Vec<String>,
        span: Span,
    },
    Uncall {
        module: String,
        args: Vec<String>,
        span: Span,
    },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::Skip { span }
            | Stmt::Swap { span, .. }
            | Stmt::Unary { span, .. }
            | Stmt::Assign { span, .. }
            | Stmt::If { span, .. }
            | Stmt::For { span, .. }
            | Stmt::Call { span, .. }
            | Stmt::Uncall { span, .. } => *span,
        }
    }
}

/// All-ones mask for `width` bits (`width` ≤ 64).
pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Infers the width of `expr` given signal widths and the width expected by
/// the context. Literals adopt the expected width. Returns `None` when the
/// width cannot be determined (e.g. an unresolved index or an unknown
/// signal); width mismatches are not reported here.
pub fn infer_width(
    expr: &Expr,
    signal_width: &impl Fn(&str) -> Option<u32>,
    expected: Option<u32>,
) -> Option<u32> {
    match expr {
        Expr::Const(_) | Expr::WidthOf(_) | Expr::LoopVar(_) => expected,
        Expr::Signal(a) => a.width(signal_width(&a.name)?),
        Expr::Binary { op, lhs, rhs } => {
            if op.yields_bit() {
                Some(1)
            } else {
                infer_width(lhs, signal_width, expected)
                    .or_else(|| infer_width(rhs, signal_width, expected))
            }
        }
        Expr::Shift { operand, .. } => infer_width(operand, signal_width, expected),
    }
}

/// Width at which the operands of a comparison or logical operator are
/// evaluated.
pub fn operand_width(
    op: BinOp,
    lhs: &Expr,
    rhs: &Expr,
    signal_width: &impl Fn(&str) -> Option<u32>,
) -> Option<u32> {
    if op.is_logical() {
        return Some(1);
    }
    infer_width(lhs, signal_width, None).or_else(|| infer_width(rhs, signal_width, None))
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::pretty::write_program(f, self)
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::pretty::write_stmt_inline(f, self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::pretty::write_expr(f, self)
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::pretty::write_access(f, self)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::pretty::write_number(f, self)
    }
}
