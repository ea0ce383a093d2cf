//! Tokenizer and expression parser shared by coefficient strings and the model language.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Num(BigRational),
    Ident(String),
    Punct(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(n) => write!(f, "number {n}"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Punct(c) => write!(f, "'{c}'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {pos}: {message}")]
pub struct SyntaxError {
    pub pos: Pos,
    pub message: String,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError {
            pos,
            message: message.into(),
        }
    }
}

const PUNCT: &[char] = &['+', '-', '*', '/', '^', '(', ')', ';', '=', ','];

/// Split `src` into tokens. `#` starts a comment running to end of line.
pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let ch = chars[i];
        let pos = Pos { line, col };
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if ch.is_ascii_digit()
            || (ch == '.' && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Num(
                    parse_decimal(&text).ok_or_else(|| {
                        SyntaxError::new(pos, format!("malformed number '{text}'"))
                    })?,
                ),
                pos,
            });
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                pos,
            });
            continue;
        }
        if PUNCT.contains(&ch) {
            out.push(Token {
                tok: Tok::Punct(ch),
                pos,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(SyntaxError::new(
            pos,
            format!("unexpected character '{ch}'"),
        ));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let mut parts = text.split('.');
    let int = parts.next()?;
    let frac = parts.next().unwrap_or("");
    if parts.next().is_some() {
        return None;
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let d = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(n, d))
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Num(BigRational),
    Ident(String),
    Call(String, Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    fn new(kind: ExprKind, pos: Pos) -> Self {
        Expr { kind, pos }
    }
}

/// Recursive-descent parser over a token vector.
pub struct Parser {
    toks: Vec<Token>,
    idx: usize,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Self {
        Parser { toks, idx: 0 }
    }

    pub fn from_str(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser::new(tokenize(src)?))
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.idx]
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, c: char) -> Result<Pos, SyntaxError> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(t.pos)
        } else {
            Err(SyntaxError::new(
                t.pos,
                format!("expected '{c}', found {}", t.tok),
            ))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, Pos), SyntaxError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.pos)),
            other => Err(SyntaxError::new(
                t.pos,
                format!("expected a name, found {other}"),
            )),
        }
    }

    pub fn expect_eof(&mut self) -> Result<(), SyntaxError> {
        let t = self.peek().clone();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            Err(SyntaxError::new(t.pos, format!("unexpected {}", t.tok)))
        }
    }

    pub fn parse_expr(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.parse_term()?;
        loop {
            let pos = self.peek().pos;
            if self.eat_punct('+') {
                let rhs = self.parse_term()?;
                lhs = Expr::new(ExprKind::Add(Box::new(lhs), Box::new(rhs)), pos);
            } else if self.eat_punct('-') {
                let rhs = self.parse_term()?;
                lhs = Expr::new(ExprKind::Sub(Box::new(lhs), Box::new(rhs)), pos);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expr, SyntaxError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let pos = self.peek().pos;
            if self.eat_punct('*') {
                let rhs = self.parse_unary()?;
                lhs = Expr::new(ExprKind::Mul(Box::new(lhs), Box::new(rhs)), pos);
            } else if self.eat_punct('/') {
                let rhs = self.parse_unary()?;
                lhs = Expr::new(ExprKind::Div(Box::new(lhs), Box::new(rhs)), pos);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Expr, SyntaxError> {
        let pos = self.peek().pos;
        if self.eat_punct('-') {
            let inner = self.parse_unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), pos));
        }
        if self.eat_punct('+') {
            return self.parse_unary();
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, SyntaxError> {
        let base = self.parse_atom()?;
        let pos = self.peek().pos;
        if self.eat_punct('^') {
            let t = self.next();
            let n = match &t.tok {
                Tok::Num(n) if n.is_integer() && n >= &BigRational::one() => n.to_integer(),
                other => {
                    return Err(SyntaxError::new(
                        t.pos,
                        format!("exponent must be a positive integer, found {other}"),
                    ))
                }
            };
            let n: u32 = n
                .try_into()
                .map_err(|_| SyntaxError::new(t.pos, "exponent too large"))?;
            return Ok(Expr::new(ExprKind::Pow(Box::new(base), n), pos));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, SyntaxError> {
        let t = self.next();
        match t.tok {
            Tok::Num(n) => Ok(Expr::new(ExprKind::Num(n), t.pos)),
            Tok::Ident(name) => {
                if self.eat_punct('(') {
                    let arg = self.parse_expr()?;
                    self.expect_punct(')')?;
                    Ok(Expr::new(ExprKind::Call(name, Box::new(arg)), t.pos))
                } else {
                    Ok(Expr::new(ExprKind::Ident(name), t.pos))
                }
            }
            Tok::Punct('(') => {
                let inner = self.parse_expr()?;
                self.expect_punct(')')?;
                Ok(inner)
            }
            other => Err(SyntaxError::new(
                t.pos,
                format!("expected an expression, found {other}"),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_exact() {
        assert_eq!(
            parse_decimal("1.25"),
            Some(BigRational::new(5.into(), 4.into()))
        );
        assert_eq!(
            parse_decimal("3"),
            Some(BigRational::from_integer(3.into()))
        );
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = Parser::from_str("-x^2").unwrap().parse_expr().unwrap();
        assert!(matches!(e.kind, ExprKind::Neg(_)));
    }

    #[test]
    fn reports_position() {
        let err = tokenize("a +\n  $").unwrap_err();
        assert_eq!(err.pos, Pos { line: 2, col: 3 });
    }
}
