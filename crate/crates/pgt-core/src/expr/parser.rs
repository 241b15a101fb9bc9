//! Recursive-descent parser for the expression grammar.
//!
//! Precedence, loosest to tightest: `+ -`, then `* /`, then unary minus;
//! `pow(...)` and `sqrt(...)` use call syntax and parse as atoms. Variable
//! indices are 1-based in source text and validated against the declared
//! per-player dimensions, so a reference like `x[4][1]` in a 3-player game
//! fails at parse time with the byte offset of the reference.

use super::Expr;
use crate::error::{CoreError, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= self.src.len() {
                return Ok(out);
            }
            let start = self.pos;
            let c = self.src[self.pos];
            let tok = match c {
                b'+' => {
                    self.pos += 1;
                    Tok::Plus
                }
                b'-' => {
                    self.pos += 1;
                    Tok::Minus
                }
                b'*' => {
                    self.pos += 1;
                    Tok::Star
                }
                b'/' => {
                    self.pos += 1;
                    Tok::Slash
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b'[' => {
                    self.pos += 1;
                    Tok::LBracket
                }
                b']' => {
                    self.pos += 1;
                    Tok::RBracket
                }
                b',' => {
                    self.pos += 1;
                    Tok::Comma
                }
                b'0'..=b'9' => self.number(start)?,
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while self.pos < self.src.len()
                        && (self.src[self.pos].is_ascii_alphanumeric()
                            || self.src[self.pos] == b'_')
                    {
                        self.pos += 1;
                    }
                    Tok::Ident(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
                }
                other => {
                    return Err(CoreError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn number(&mut self, start: usize) -> Result<Tok> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len()
                && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                // `e` was the start of an identifier, not an exponent
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<f64>()
            .map(Tok::Num)
            .map_err(|_| CoreError::Syntax {
                offset: start,
                message: format!("invalid number literal `{text}`"),
            })
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dims: &'a [usize],
    end: usize,
}

/// Parses `source` into an [`Expr`], validating every variable reference
/// against `dims` (the per-player coordinate counts).
pub fn parse_expression(source: &str, dims: &[usize]) -> Result<Expr> {
    let toks = Lexer::new(source).tokens()?;
    let mut p = Parser {
        toks,
        pos: 0,
        dims,
        end: source.len(),
    };
    let e = p.expr()?;
    if let Some((tok, off)) = p.peek_with_offset() {
        return Err(CoreError::Syntax {
            offset: off,
            message: format!("unexpected trailing token `{tok:?}`"),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_with_offset(&self) -> Option<(&Tok, usize)> {
        self.toks.get(self.pos).map(|(t, o)| (t, *o))
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let off = self.offset();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            got => Err(CoreError::Syntax {
                offset: off,
                message: format!("expected {what}, found {got:?}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = Expr::Add(Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = Expr::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = Expr::Mul(Box::new(acc), Box::new(rhs));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = Expr::Div(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            let inner = self.factor()?;
            // fold a sign applied to a literal so printing round-trips
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        let off = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Const(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => self.variable(off),
                "xbar" => self.aggregate(off),
                "pow" => self.pow_call(),
                "sqrt" => {
                    self.expect(Tok::LParen, "`(` after sqrt")?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Expr::Sqrt(Box::new(e)))
                }
                _ => Ok(Expr::Param(name)),
            },
            got => Err(CoreError::Syntax {
                offset: off,
                message: format!("expected a value, found {got:?}"),
            }),
        }
    }

    fn index(&mut self) -> Result<usize> {
        self.expect(Tok::LBracket, "`[`")?;
        let off = self.offset();
        let v = match self.bump() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && v >= 1.0 => v as usize,
            got => {
                return Err(CoreError::Syntax {
                    offset: off,
                    message: format!("expected a 1-based integer index, found {got:?}"),
                })
            }
        };
        self.expect(Tok::RBracket, "`]`")?;
        Ok(v)
    }

    fn variable(&mut self, start: usize) -> Result<Expr> {
        let player = self.index()?;
        let coord = self.index()?;
        if player > self.dims.len() {
            return Err(CoreError::UnknownVariable {
                offset: start,
                message: format!(
                    "x[{player}][{coord}]: player index exceeds the {} declared players",
                    self.dims.len()
                ),
            });
        }
        if coord > self.dims[player - 1] {
            return Err(CoreError::UnknownVariable {
                offset: start,
                message: format!(
                    "x[{player}][{coord}]: coordinate exceeds dimension {} of player {player}",
                    self.dims[player - 1]
                ),
            });
        }
        Ok(Expr::Var {
            player: player - 1,
            coord: coord - 1,
        })
    }

    fn aggregate(&mut self, start: usize) -> Result<Expr> {
        let coord = self.index()?;
        let shared = self.dims.first().copied().unwrap_or(0);
        if !self.dims.iter().all(|&d| d == shared) {
            return Err(CoreError::UnknownVariable {
                offset: start,
                message: "xbar requires all players to share one dimension".into(),
            });
        }
        if coord > shared {
            return Err(CoreError::UnknownVariable {
                offset: start,
                message: format!("xbar[{coord}]: coordinate exceeds the shared dimension {shared}"),
            });
        }
        Ok(Expr::Aggregate { coord: coord - 1 })
    }

    fn pow_call(&mut self) -> Result<Expr> {
        self.expect(Tok::LParen, "`(` after pow")?;
        let base = self.expr()?;
        self.expect(Tok::Comma, "`,` between pow arguments")?;
        let neg = if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        let off = self.offset();
        let exponent = match self.bump() {
            Some(Tok::Num(v)) => {
                if neg {
                    -v
                } else {
                    v
                }
            }
            got => {
                return Err(CoreError::Syntax {
                    offset: off,
                    message: format!("pow exponent must be a numeric literal, found {got:?}"),
                })
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(Expr::Pow(Box::new(base), exponent))
    }
}
