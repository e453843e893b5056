//! Lexing, parsing, checking and elaboration of SyReC source text.

pub mod analyze;
pub mod ast;
pub mod diag;
pub mod elaborate;
pub mod lexer;
pub mod parser;
mod pretty;

pub use analyze::{analyze, analyze_with, CheckedProgram};
pub use ast::*;
pub use diag::{Diagnostic, Diagnostics, Pos, Severity, Span};
pub use elaborate::{elaborate, ElaboratedProgram};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElabSettings {
    /// Width of signals declared without an explicit width.
    pub default_width: u32,
    /// Upper bound on the total number of loop iterations unrolled.
    pub max_unroll: usize,
}

impl Default for ElabSettings {
    fn default() -> Self {
        Self {
            default_width: 32,
            max_unroll: 4096,
        }
    }
}

/// Parses, checks and elaborates `source` in one go.
pub fn compile(source: &str, settings: &ElabSettings) -> Result<ElaboratedProgram, Diagnostics> {
    let program = parse(source)?;
    let checked = analyze_with(program, settings)?;
    elaborate(&checked, settings)
}
