//! Tokenizer for SyReC source text.

use std::fmt;

use super::diag::{Diagnostic, Diagnostics, Pos, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(u64),
    /// `$name`
    LoopVar(String),
    /// `#name`
    WidthOf(String),

    KwModule,
    KwIn,
    KwOut,
    KwInout,
    KwWire,
    KwState,
    KwIf,
    KwThen,
    KwElse,
    KwFi,
    KwFor,
    KwTo,
    KwStep,
    KwDo,
    KwRof,
    KwCall,
    KwUncall,
    KwSkip,

    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Semi,

    SwapOp,
    CaretEq,
    PlusEq,
    MinusEq,
    TildeEq,
    PlusPlusEq,
    MinusMinusEq,

    Plus,
    Minus,
    Caret,
    Amp,
    Pipe,
    AmpAmp,
    PipePipe,
    Lt,
    Gt,
    Eq,
    Ne,
    Le,
    Ge,
    Shl,
    Shr,

    /// Operators that belong to full SyReC but are rejected here
    /// (`*`, `/`, `%`, `*>`).
    Unsupported(&'static str),
}

impl TokenKind {
    fn keyword(word: &str) -> Option<TokenKind> {
        use TokenKind::*;
        Some(match word {
            "module" => KwModule,
            "in" => KwIn,
            "out" => KwOut,
            "inout" => KwInout,
            "wire" => KwWire,
            "state" => KwState,
            "if" => KwIf,
            "then" => KwThen,
            "else" => KwElse,
            "fi" => KwFi,
            "for" => KwFor,
            "to" => KwTo,
            "step" => KwStep,
            "do" => KwDo,
            "rof" => KwRof,
            "call" => KwCall,
            "uncall" => KwUncall,
            "skip" => KwSkip,
            _ => return None,
        })
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use TokenKind::*;
        let s = match self {
            Ident(name) => return write!(f, "identifier '{name}'"),
            Int(v) => return write!(f, "number {v}"),
            LoopVar(name) => return write!(f, "'${name}'"),
            WidthOf(name) => return write!(f, "'#{name}'"),
            KwModule => "'module'",
            KwIn => "'in'",
            KwOut => "'out'",
            KwInout => "'inout'",
            KwWire => "'wire'",
            KwState => "'state'",
            KwIf => "'if'",
            KwThen => "'then'",
            KwElse => "'else'",
            KwFi => "'fi'",
            KwFor => "'for'",
            KwTo => "'to'",
            KwStep => "'step'",
            KwDo => "'do'",
            KwRof => "'rof'",
            KwCall => "'call'",
            KwUncall => "'uncall'",
            KwSkip => "'skip'",
            LParen => "'('",
            RParen => "')'",
            Comma => "','",
            Dot => "'.'",
            Colon => "':'",
            Semi => "';'",
            SwapOp => "'<=>'",
            CaretEq => "'^='",
            PlusEq => "'+='",
            MinusEq => "'-='",
            TildeEq => "'~='",
            PlusPlusEq => "'++='",
            MinusMinusEq => "'--='",
            Plus => "'+'",
            Minus => "'-'",
            Caret => "'^'",
            Amp => "'&'",
            Pipe => "'|'",
            AmpAmp => "'&&'",
            PipePipe => "'||'",
            Lt => "'<'",
            Gt => "'>'",
            Eq => "'='",
            Ne => "'!='",
            Le => "'<='",
            Ge => "'>='",
            Shl => "'<<'",
            Shr => "'>>'",
            Unsupported(op) => return write!(f, "'{op}'"),
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
    /// A line break separates this token from the previous one.
    pub newline_before: bool,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        Pos::new(self.line, self.column)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

/// Splits `source` into tokens. Whitespace and comments are skipped;
/// every lexical error in the input is reported.
pub fn tokenize(source: &str) -> Result<Vec<Token>, Diagnostics> {
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let mut newline = false;

    while let Some(c) = cur.peek() {
        let start = cur.pos();
        if c == '\n' {
            newline = true;
            cur.bump();
            continue;
        }
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        cur.bump();
        let kind = match c {
            '/' if cur.eat('/') => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
                continue;
            }
            '/' if cur.eat('*') => {
                let mut closed = false;
                while let Some(c) = cur.bump() {
                    if c == '\n' {
                        newline = true;
                    }
                    if c == '*' && cur.eat('/') {
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    errors.push(Diagnostic::error(
                        "unterminated block comment",
                        Span::new(start, cur.pos()),
                    ));
                }
                continue;
            }
            '/' => TokenKind::Unsupported("/"),
            '%' => TokenKind::Unsupported("%"),
            '*' if cur.eat('>') => TokenKind::Unsupported("*>"),
            '*' => TokenKind::Unsupported("*"),
            '(' => TokenKind::LParen,
            ')' => TokenKind::RParen,
            ',' => TokenKind::Comma,
            '.' => TokenKind::Dot,
            ':' => TokenKind::Colon,
            ';' => TokenKind::Semi,
            '^' if cur.eat('=') => TokenKind::CaretEq,
            '^' => TokenKind::Caret,
            '~' if cur.eat('=') => TokenKind::TildeEq,
            '+' if cur.eat('+') => {
                if cur.eat('=') {
                    TokenKind::PlusPlusEq
                } else {
                    errors.push(Diagnostic::error(
                        "expected '++='",
                        Span::new(start, cur.pos()),
                    ));
                    continue;
                }
            }
            '+' if cur.eat('=') => TokenKind::PlusEq,
            '+' => TokenKind::Plus,
            '-' if cur.eat('-') => {
                if cur.eat('=') {
                    TokenKind::MinusMinusEq
                } else {
                    errors.push(Diagnostic::error(
                        "expected '--='",
                        Span::new(start, cur.pos()),
                    ));
                    continue;
                }
            }
            '-' if cur.eat('=') => TokenKind::MinusEq,
            '-' => TokenKind::Minus,
            '&' if cur.eat('&') => TokenKind::AmpAmp,
            '&' => TokenKind::Amp,
            '|' if cur.eat('|') => TokenKind::PipePipe,
            '|' => TokenKind::Pipe,
            '<' if cur.eat('<') => TokenKind::Shl,
            '<' if cur.eat('=') => {
                if cur.eat('>') {
                    TokenKind::SwapOp
                } else {
                    TokenKind::Le
                }
            }
            '<' => TokenKind::Lt,
            '>' if cur.eat('>') => TokenKind::Shr,
            '>' if cur.eat('=') => TokenKind::Ge,
            '>' => TokenKind::Gt,
            '=' => TokenKind::Eq,
            '!' if cur.eat('=') => TokenKind::Ne,
            '$' | '#' => {
                if cur.peek().is_some_and(is_ident_start) {
                    let name = cur.word();
                    if c == '$' {
                        TokenKind::LoopVar(name)
                    } else {
                        TokenKind::WidthOf(name)
                    }
                } else {
                    errors.push(Diagnostic::error(
                        format!("expected identifier after '{c}'"),
                        Span::new(start, cur.pos()),
                    ));
                    continue;
                }
            }
            c if c.is_ascii_digit() => {
                let mut digits = String::from(c);
                digits.push_str(&cur.word());
                match digits.parse::<u64>() {
                    Ok(v) => TokenKind::Int(v),
                    Err(_) => {
                        errors.push(Diagnostic::error(
                            format!("invalid integer literal '{digits}'"),
                            Span::new(start, cur.pos()),
                        ));
                        continue;
                    }
                }
            }
            c if is_ident_start(c) => {
                let mut word = String::from(c);
                word.push_str(&cur.word());
                TokenKind::keyword(&word).unwrap_or(TokenKind::Ident(word))
            }
            other => {
                errors.push(Diagnostic::error(
                    format!("unexpected character '{other}'"),
                    Span::new(start, cur.pos()),
                ));
                continue;
            }
        };
        tokens.push(Token {
            kind,
            span: Span::new(start, cur.pos()),
            newline_before: std::mem::take(&mut newline),
        });
    }

    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(Diagnostics(errors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn single_keyword() {
        assert_eq!(kinds("skip"), vec![KwSkip]);
    }

    #[test]
    fn xor_assign_statement() {
        assert_eq!(
            kinds("x0 ^= (x1 + x2)"),
            vec![
                Ident("x0".into()),
                CaretEq,
                LParen,
                Ident("x1".into()),
                Plus,
                Ident("x2".into()),
                RParen
            ]
        );
    }

    #[test]
    fn unexpected_character_has_location() {
        let err = tokenize("a @ b").unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].message, "unexpected character '@'");
        assert_eq!(err.0[0].span.start, Pos::new(1, 3));
    }

    #[test]
    fn longest_match_operators() {
        assert_eq!(
            kinds("<=> <= < << >> >= > ++= += + --= -= - ~= != && & || |"),
            vec![
                SwapOp, Le, Lt, Shl, Shr, Ge, Gt, PlusPlusEq, PlusEq, Plus, MinusMinusEq,
                MinusEq, Minus, TildeEq, Ne, AmpAmp, Amp, PipePipe, Pipe
            ]
        );
    }

    #[test]
    fn comments_and_newlines() {
        let toks = tokenize("a // note\n/* multi\nline */ b").unwrap();
        assert_eq!(toks.len(), 2);
        assert!(!toks[0].newline_before);
        assert!(toks[1].newline_before);
        assert_eq!(toks[1].span.start, Pos::new(3, 9));
    }

    #[test]
    fn unterminated_comment() {
        let err = tokenize("a /* open").unwrap_err();
        assert_eq!(err.0[0].message, "unterminated block comment");
    }

    #[test]
    fn loop_vars_and_width_of() {
        assert_eq!(
            kinds("$i #x a.0:1"),
            vec![
                LoopVar("i".into()),
                WidthOf("x".into()),
                Ident("a".into()),
                Dot,
                Int(0),
                Colon,
                Int(1)
            ]
        );
    }

    #[test]
    fn reports_every_bad_character() {
        let err = tokenize("@ a ? !").unwrap_err();
        assert_eq!(err.0.len(), 3);
    }
}
