//! Recursive-descent parser producing [`Program`] trees.
//!
//! Operator precedence, loosest first: `||`, `&&`, comparisons, `|`, `^`,
//! `&`, shifts, `+`/`-`. Statements are separated by `;` or a line break.

use super::ast::*;
use super::diag::{Diagnostic, Diagnostics, Pos, Span};
use super::lexer::{tokenize, Token, TokenKind};

type PResult<T> = Result<T, Diagnostic>;

/// Parses a complete source text.
pub fn parse(source: &str) -> Result<Program, Diagnostics> {
    let tokens = tokenize(source)?;
    let end = tokens.last().map(|t| t.span.end).unwrap_or(Pos::new(1, 1));
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
    };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_token(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn span(&self) -> Span {
        match self.tokens.get(self.pos) {
            Some(t) => t.span,
            None => Span::new(self.end, self.end),
        }
    }

    fn prev_span(&self) -> Span {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.tokens.get(i))
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at(&self, kind: &TokenKind) -> bool {
        self.peek() == Some(kind)
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        match self.peek() {
            Some(TokenKind::Unsupported(op)) => Diagnostic::error(
                format!("operator '{op}' is not supported"),
                self.span(),
            ),
            Some(found) => Diagnostic::error(
                format!("expected {expected}, found {found}"),
                self.span(),
            ),
            None => Diagnostic::error(
                format!("expected {expected}, found end of input"),
                self.span(),
            ),
        }
    }

    fn expect(&mut self, kind: &TokenKind) -> PResult<Span> {
        if self.at(kind) {
            Ok(self.bump().map(|t| t.span).unwrap_or_default())
        } else {
            Err(self.unexpected(&kind.to_string()))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let t = self.bump().expect("peeked");
                match t.kind {
                    TokenKind::Ident(name) => Ok((name, t.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn program(&mut self) -> Result<Program, Diagnostics> {
        let mut modules = Vec::new();
        let mut errors = Vec::new();
        while self.peek().is_some() {
            let start = self.pos;
            match self.module() {
                Ok(m) => modules.push(m),
                Err(d) => {
                    errors.push(d);
                    // resynchronize on the next module header
                    if self.pos == start || !self.at(&TokenKind::KwModule) {
                        self.bump();
                    }
                    while self.peek().is_some() && !self.at(&TokenKind::KwModule) {
                        self.bump();
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(Program { modules })
        } else {
            Err(Diagnostics(errors))
        }
    }

    fn module(&mut self) -> PResult<Module> {
        let start = self.expect(&TokenKind::KwModule)?;
        let (name, _) = self.ident()?;
        self.expect(&TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.at(&TokenKind::RParen) {
            loop {
                params.push(self.param()?);
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }
        self.expect(&TokenKind::RParen)?;

        let mut locals = Vec::new();
        loop {
            let kind = match self.peek() {
                Some(TokenKind::KwWire) => LocalKind::Wire,
                Some(TokenKind::KwState) => LocalKind::State,
                _ => break,
            };
            self.bump();
            loop {
                let (lname, lspan) = self.ident()?;
                let width = self.opt_width()?;
                locals.push(Local {
                    kind,
                    name: lname,
                    width,
                    span: lspan.to(self.prev_span()),
                });
                if !self.eat(&TokenKind::Comma) {
                    break;
                }
            }
        }

        let body = self.stmt_list()?;
        Ok(Module {
            name,
            params,
            locals,
            body,
            span: start.to(self.prev_span()),
        })
    }

    fn param(&mut self) -> PResult<Param> {
        let start = self.span();
        let direction = match self.peek() {
            Some(TokenKind::KwIn) => Direction::In,
            Some(TokenKind::KwOut) => Direction::Out,
            Some(TokenKind::KwInout) => Direction::Inout,
            _ => return Err(self.unexpected("'in', 'out' or 'inout'")),
        };
        self.bump();
        let (name, _) = self.ident()?;
        let width = self.opt_width()?;
        Ok(Param {
            direction,
            name,
            width,
            span: start.to(self.prev_span()),
        })
    }

    fn opt_width(&mut self) -> PResult<Option<u32>> {
        if !self.eat(&TokenKind::LParen) {
            return Ok(None);
        }
        let span = self.span();
        let w = match self.bump().map(|t| t.kind) {
            Some(TokenKind::Int(v)) => v,
            _ => {
                self.pos -= 1;
                return Err(self.unexpected("signal width"));
            }
        };
        self.expect(&TokenKind::RParen)?;
        u32::try_from(w)
            .map(Some)
            .map_err(|_| Diagnostic::error(format!("width {w} is too large"), span))
    }

    fn at_stmt_end(&self) -> bool {
        matches!(
            self.peek(),
            None | Some(TokenKind::KwElse)
                | Some(TokenKind::KwFi)
                | Some(TokenKind::KwRof)
                | Some(TokenKind::KwModule)
        )
    }

    fn stmt_list(&mut self) -> PResult<Vec<Stmt>> {
        let mut body = vec![self.stmt()?];
        loop {
            if self.eat(&TokenKind::Semi) {
                if self.at_stmt_end() {
                    break;
                }
                body.push(self.stmt()?);
                continue;
            }
            if self.at_stmt_end() {
                break;
            }
            if self.peek_token().is_some_and(|t| t.newline_before) {
                body.push(self.stmt()?);
                continue;
            }
            return Err(self.unexpected("';' or a line break between statements"));
        }
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.span();
        match self.peek() {
            Some(TokenKind::KwSkip) => {
                self.bump();
                Ok(Stmt::Skip { span: start })
            }
            Some(TokenKind::TildeEq | TokenKind::PlusPlusEq | TokenKind::MinusMinusEq) => {
                let op = match self.bump().map(|t| t.kind) {
                    Some(TokenKind::TildeEq) => UnaryOp::Invert,
                    Some(TokenKind::PlusPlusEq) => UnaryOp::Increment,
                    _ => UnaryOp::Decrement,
                };
                let target = self.access()?;
                Ok(Stmt::Unary {
                    op,
                    target,
                    span: start.to(self.prev_span()),
                })
            }
            Some(TokenKind::KwIf) => {
                self.bump();
                let cond = self.expr()?;
                self.expect(&TokenKind::KwThen)?;
                let then_body = self.stmt_list()?;
                self.expect(&TokenKind::KwElse)?;
                let else_body = self.stmt_list()?;
                self.expect(&TokenKind::KwFi)?;
                let fi_cond = self.expr()?;
                Ok(Stmt::If {
                    cond,
                    then_body,
                    else_body,
                    fi_cond,
                    span: start.to(self.prev_span()),
                })
            }
            Some(TokenKind::KwFor) => {
                self.bump();
                let var = match self.bump().map(|t| t.kind) {
                    Some(TokenKind::LoopVar(v)) => v,
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("loop variable '$name'"));
                    }
                };
                self.expect(&TokenKind::Eq)?;
                let from = self.number()?;
                self.expect(&TokenKind::KwTo)?;
                let to = self.number()?;
                let step = if self.eat(&TokenKind::KwStep) {
                    Some(self.number()?)
                } else {
                    None
                };
                self.expect(&TokenKind::KwDo)?;
                let body = self.stmt_list()?;
                self.expect(&TokenKind::KwRof)?;
                Ok(Stmt::For {
                    var,
                    from,
                    to,
                    step,
                    body,
                    span: start.to(self.prev_span()),
                })
            }
            Some(TokenKind::KwCall | TokenKind::KwUncall) => {
                let is_call = self.at(&TokenKind::KwCall);
                self.bump();
                let (module, _) = self.ident()?;
                self.expect(&TokenKind::LParen)?;
                let mut args = Vec::new();
                if !self.at(&TokenKind::RParen) {
                    loop {
                        args.push(self.ident()?.0);
                        if !self.eat(&TokenKind::Comma) {
                            break;
                        }
                    }
                }
                self.expect(&TokenKind::RParen)?;
                let span = start.to(self.prev_span());
                Ok(if is_call {
                    Stmt::Call { module, args, span }
                } else {
                    Stmt::Uncall { module, args, span }
                })
            }
            Some(TokenKind::Ident(_)) => {
                let lhs = self.access()?;
                let op = match self.peek() {
                    Some(TokenKind::SwapOp) => {
                        self.bump();
                        let rhs = self.access()?;
                        return Ok(Stmt::Swap {
                            lhs,
                            rhs,
                            span: start.to(self.prev_span()),
                        });
                    }
                    Some(TokenKind::CaretEq) => AssignOp::Xor,
                    Some(TokenKind::PlusEq) => AssignOp::Add,
                    Some(TokenKind::MinusEq) => AssignOp::Sub,
                    _ => return Err(self.unexpected("'<=>', '^=', '+=' or '-='")),
                };
                self.bump();
                let rhs = self.expr()?;
                Ok(Stmt::Assign {
                    op,
                    lhs,
                    rhs,
                    span: start.to(self.prev_span()),
                })
            }
            _ => Err(self.unexpected("statement")),
        }
    }

    fn access(&mut self) -> PResult<Access> {
        let (name, start) = self.ident()?;
        let selector = if self.eat(&TokenKind::Dot) {
            let first = self.number()?;
            if self.eat(&TokenKind::Colon) {
                Selector::Range(first, self.number()?)
            } else {
                Selector::Bit(first)
            }
        } else {
            Selector::Whole
        };
        Ok(Access {
            name,
            selector,
            span: start.to(self.prev_span()),
        })
    }

    fn number(&mut self) -> PResult<Number> {
        match self.peek() {
            Some(TokenKind::Int(_)) => match self.bump().map(|t| t.kind) {
                Some(TokenKind::Int(v)) => Ok(Number::Lit(v)),
                _ => unreachable!(),
            },
            Some(TokenKind::LoopVar(_)) => match self.bump().map(|t| t.kind) {
                Some(TokenKind::LoopVar(v)) => Ok(Number::LoopVar(v)),
                _ => unreachable!(),
            },
            Some(TokenKind::WidthOf(_)) => match self.bump().map(|t| t.kind) {
                Some(TokenKind::WidthOf(v)) => Ok(Number::WidthOf(v)),
                _ => unreachable!(),
            },
            Some(TokenKind::Minus) => {
                self.bump();
                Ok(Number::Neg(Box::new(self.number()?)))
            }
            Some(TokenKind::LParen) => {
                self.bump();
                let lhs = self.number()?;
                let op = match self.peek() {
                    Some(TokenKind::Plus) => NumOp::Add,
                    Some(TokenKind::Minus) => NumOp::Sub,
                    _ => return Err(self.unexpected("'+' or '-'")),
                };
                self.bump();
                let rhs = self.number()?;
                self.expect(&TokenKind::RParen)?;
                Ok(Number::Binary(op, Box::new(lhs), Box::new(rhs)))
            }
            _ => Err(self.unexpected("number")),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.logic_or()
    }

    fn binary_level(
        &mut self,
        next: fn(&mut Self) -> PResult<Expr>,
        ops: &[(TokenKind, BinOp)],
    ) -> PResult<Expr> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (tok, op) in ops {
                if self.eat(tok) {
                    let rhs = next(self)?;
                    lhs = Expr::binary(*op, lhs, rhs);
                    continue 'outer;
                }
            }
            if let Some(TokenKind::Unsupported(_)) = self.peek() {
                return Err(self.unexpected("operator"));
            }
            return Ok(lhs);
        }
    }

    fn logic_or(&mut self) -> PResult<Expr> {
        self.binary_level(Self::logic_and, &[(TokenKind::PipePipe, BinOp::LogicOr)])
    }

    fn logic_and(&mut self) -> PResult<Expr> {
        self.binary_level(Self::comparison, &[(TokenKind::AmpAmp, BinOp::LogicAnd)])
    }

    fn comparison(&mut self) -> PResult<Expr> {
        self.binary_level(
            Self::bit_or,
            &[
                (TokenKind::Eq, BinOp::Eq),
                (TokenKind::Ne, BinOp::Ne),
                (TokenKind::Le, BinOp::Le),
                (TokenKind::Ge, BinOp::Ge),
                (TokenKind::Lt, BinOp::Lt),
                (TokenKind::Gt, BinOp::Gt),
            ],
        )
    }

    fn bit_or(&mut self) -> PResult<Expr> {
        self.binary_level(Self::bit_xor, &[(TokenKind::Pipe, BinOp::Or)])
    }

    fn bit_xor(&mut self) -> PResult<Expr> {
        self.binary_level(Self::bit_and, &[(TokenKind::Caret, BinOp::Xor)])
    }

    fn bit_and(&mut self) -> PResult<Expr> {
        self.binary_level(Self::shift, &[(TokenKind::Amp, BinOp::And)])
    }

    fn shift(&mut self) -> PResult<Expr> {
        let mut operand = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Shl) => ShiftOp::Left,
                Some(TokenKind::Shr) => ShiftOp::Right,
                _ => return Ok(operand),
            };
            self.bump();
            let amount = self.number()?;
            operand = Expr::Shift {
                op,
                operand: Box::new(operand),
                amount,
            };
        }
    }

    fn additive(&mut self) -> PResult<Expr> {
        self.binary_level(
            Self::primary,
            &[(TokenKind::Plus, BinOp::Add), (TokenKind::Minus, BinOp::Sub)],
        )
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Some(TokenKind::Int(v)) => {
                let v = *v;
                self.bump();
                Ok(Expr::Const(v))
            }
            Some(TokenKind::LoopVar(v)) => {
                let v = v.clone();
                self.bump();
                Ok(Expr::LoopVar(v))
            }
            Some(TokenKind::WidthOf(v)) => {
                let v = v.clone();
                self.bump();
                Ok(Expr::WidthOf(v))
            }
            Some(TokenKind::Ident(_)) => Ok(Expr::Signal(self.access()?)),
            Some(TokenKind::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(&TokenKind::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}
