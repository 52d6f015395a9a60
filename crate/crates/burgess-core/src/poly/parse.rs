//! Text grammar for polynomials.
//!
//! Terms are joined by `+` / `-`; a term is an optional numeric coefficient
//! followed by `*`-separated `x<i>[^<exp>]` factors; variables are `x1..xn`;
//! whitespace is ignored. Printing a polynomial (see the `Display` impl in
//! the parent module) and re-parsing it is the identity on canonical forms.

use crate::coeff::Coeff;
use crate::error::{Error, Result};

use super::{Monomial, MultiPoly};

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::ParseError {
            offset: self.pos,
            message: message.into(),
        }
    }

    /// Scan an unsigned integer literal, returning its text.
    fn integer(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a digit"));
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap())
    }

    /// Scan `digits[.digits]`, returning the literal text.
    fn number(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        self.integer()?;
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        Ok(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap())
    }
}

/// Parse an expression into canonical sparse form.
pub fn parse_poly<C: Coeff>(text: &str, n: usize) -> Result<MultiPoly<C>> {
    let mut s = Scanner::new(text);
    let mut poly = MultiPoly::zero(n);
    let mut first = true;
    loop {
        // Sign of the next term.
        let mut negative = false;
        match s.peek() {
            None if first => return Err(s.err("empty polynomial expression")),
            None => break,
            Some(b'+') => {
                s.bump();
            }
            Some(b'-') => {
                negative = true;
                s.bump();
            }
            Some(_) if first => {}
            Some(c) => return Err(s.err(format!("expected '+' or '-', found {:?}", c as char))),
        }
        first = false;
        let (mono, coeff) = parse_term::<C>(&mut s, n)?;
        let coeff = if negative { -coeff } else { coeff };
        poly.add_term(mono, coeff);
    }
    Ok(poly)
}

fn parse_term<C: Coeff>(s: &mut Scanner<'_>, n: usize) -> Result<(Monomial, C)> {
    let mut coeff: Option<C> = None;
    let mut mono = Monomial::constant(n);
    let mut saw_factor = false;
    loop {
        match s.peek() {
            Some(c) if c.is_ascii_digit() => {
                if saw_factor {
                    return Err(s.err("numeric coefficient must precede the variables"));
                }
                let at = s.pos;
                let literal = s.number()?;
                let value = C::parse_literal(literal).ok_or(Error::ParseError {
                    offset: at,
                    message: format!("literal {literal:?} is not valid in this coefficient ring"),
                })?;
                coeff = Some(match coeff {
                    None => value,
                    Some(prev) => prev * value,
                });
                saw_factor = true;
            }
            Some(b'x') => {
                let at = s.pos;
                s.bump();
                let idx: usize = s.integer()?.parse().map_err(|_| Error::ParseError {
                    offset: at,
                    message: "variable index too large".into(),
                })?;
                if idx == 0 || idx > n {
                    return Err(Error::VariableOutOfRange {
                        offset: at,
                        index: idx,
                        n,
                    });
                }
                let exp: u32 = if s.peek() == Some(b'^') {
                    s.bump();
                    let at = s.pos;
                    s.integer()?.parse().map_err(|_| Error::ParseError {
                        offset: at,
                        message: "exponent too large".into(),
                    })?
                } else {
                    1
                };
                mono.0[idx - 1] += exp;
                saw_factor = true;
            }
            Some(c) => {
                return Err(s.err(format!(
                    "expected a coefficient or variable, found {:?}",
                    c as char
                )))
            }
            None => return Err(s.err("unexpected end of expression")),
        }
        if s.peek() == Some(b'*') {
            s.bump();
            continue;
        }
        break;
    }
    let coeff = coeff.unwrap_or_else(C::one);
    Ok((mono, coeff))
}
