//! Expression parser for polynomials.
//!
//! Grammar: rational literals `a` or `a/b`, identifiers, `+ - * ^`,
//! parentheses; whitespace is insignificant; `^` takes a nonnegative integer
//! exponent. There is no implicit multiplication and `/` appears only inside
//! a rational literal.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::linalg::Q;

use super::{RingSpec, SuperPolynomial};

/// Syntax (or name-resolution) error with a 1-based position.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    fn new(pos: (usize, usize), message: impl Into<String>) -> Self {
        ParseError { line: pos.0, col: pos.1, message: message.into() }
    }

    /// Shifts the reported position, for embedding in a larger source file.
    pub fn offset(mut self, line: usize, col_on_first_line: usize) -> Self {
        if self.line == 1 {
            self.col += col_on_first_line;
        }
        self.line += line;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

type Spanned = (Tok, (usize, usize));

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let pos = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '+' | '-' | '*' | '^' | '/' | '(' | ')' => {
                chars.next();
                col += 1;
                toks.push((
                    match c {
                        '+' => Tok::Plus,
                        '-' => Tok::Minus,
                        '*' => Tok::Star,
                        '^' => Tok::Caret,
                        '/' => Tok::Slash,
                        '(' => Tok::LParen,
                        _ => Tok::RParen,
                    },
                    pos,
                ));
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Int(s.parse().expect("digits")), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), pos));
            }
            other => {
                return Err(ParseError::new(pos, format!("unexpected character `{other}`")));
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    ring: &'a Arc<RingSpec>,
    toks: Vec<Spanned>,
    at: usize,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> (usize, usize) {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            _ => Err(ParseError::new(pos, format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<SuperPolynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SuperPolynomial, ParseError> {
        let mut acc = self.signed_factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            let rhs = self.signed_factor()?;
            acc = acc
                .checked_mul(&rhs)
                .expect("parser builds polynomials over one ring");
        }
        Ok(acc)
    }

    fn signed_factor(&mut self) -> Result<SuperPolynomial, ParseError> {
        let mut negate = false;
        while matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            negate = !negate;
        }
        let f = self.factor()?;
        Ok(if negate { f.neg() } else { f })
    }

    fn factor(&mut self) -> Result<SuperPolynomial, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let pos = self.pos();
            match self.bump() {
                Some(Tok::Int(n)) => {
                    let e: u32 = n.try_into().map_err(|_| {
                        ParseError::new(pos, "exponent too large")
                    })?;
                    Ok(base.pow(e))
                }
                _ => Err(ParseError::new(pos, "expected a nonnegative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<SuperPolynomial, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => {
                // Optional `/ d` completes a rational literal.
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump() {
                        Some(Tok::Int(d)) => {
                            if d.is_zero() {
                                return Err(ParseError::new(dpos, "zero denominator"));
                            }
                            Ok(SuperPolynomial::constant(self.ring, Q::new(n, d)))
                        }
                        _ => Err(ParseError::new(dpos, "expected a denominator")),
                    }
                } else {
                    Ok(SuperPolynomial::constant(self.ring, Q::from_integer(n)))
                }
            }
            Some(Tok::Ident(name)) => match self.ring.index_of(&name) {
                Some(i) => Ok(SuperPolynomial::variable(self.ring, i)),
                None => Err(ParseError::new(pos, format!("unknown variable {name}"))),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(other) => Err(ParseError::new(pos, format!("unexpected token `{other:?}`"))),
            None => Err(ParseError::new(pos, "unexpected end of expression")),
        }
    }
}

/// Parses an expression over the given ring.
pub fn parse_polynomial(
    ring: &Arc<RingSpec>,
    text: &str,
) -> Result<SuperPolynomial, ParseError> {
    let toks = lex(text)?;
    let end = {
        let lines: Vec<&str> = text.split('\n').collect();
        (lines.len(), lines.last().map(|l| l.chars().count()).unwrap_or(0) + 1)
    };
    let mut p = Parser { ring, toks, at: 0, end };
    let poly = p.expr()?;
    if p.at != p.toks.len() {
        return Err(ParseError::new(p.pos(), "trailing input after expression"));
    }
    Ok(poly)
}
