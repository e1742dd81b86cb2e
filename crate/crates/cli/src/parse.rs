//! Polynomial literals in `P, Q, R`.
//!
//! ```text
//! form     := ['+'|'-'] term (('+'|'-') term)*
//! term     := [coeff '*'] monomial | coeff
//! monomial := var ['^' int] ('*' var ['^' int])*
//! coeff    := int ['/' int]
//! ```

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use qmlab_core::{BigRational, Kind, Monomial, QmPoly};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("zero denominator at position {pos}")]
    ZeroDenominator { pos: usize },
    #[error("mixed weights: a term of weight {first} and a term of weight {second}")]
    MixedWeight { first: u32, second: u32 },
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn describe(&mut self) -> String {
        match self.peek() {
            Some(c) => format!("{:?}", c as char),
            None => "end of input".into(),
        }
    }

    fn int(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            let found = self.describe();
            return self.error(format!("expected an integer, found {found}"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(digits.parse().expect("nonempty digit run"))
    }

    fn small_int(&mut self) -> Result<u32, ParseError> {
        let start = self.pos;
        let n = self.int()?;
        u32::try_from(n).map_err(|_| ParseError::Syntax {
            pos: start,
            msg: "exponent too large".into(),
        })
    }

    fn coeff(&mut self) -> Result<BigRational, ParseError> {
        let num = self.int()?;
        if self.eat(b'/') {
            self.skip_ws();
            let at = self.pos;
            let den = self.int()?;
            if den.is_zero() {
                return Err(ParseError::ZeroDenominator { pos: at });
            }
            return Ok(BigRational::new(num, den));
        }
        Ok(BigRational::from_integer(num))
    }

    fn var(&mut self) -> Option<Monomial> {
        let m = match self.peek()? {
            b'P' => Monomial::new(1, 0, 0),
            b'Q' => Monomial::new(0, 1, 0),
            b'R' => Monomial::new(0, 0, 1),
            _ => return None,
        };
        self.pos += 1;
        Some(m)
    }

    fn monomial(&mut self, first: Monomial) -> Result<Monomial, ParseError> {
        let mut acc = Monomial::ONE;
        let mut var = first;
        loop {
            let e = if self.eat(b'^') { self.small_int()? } else { 1 };
            acc = Monomial::new(acc.p + var.p * e, acc.q + var.q * e, acc.r + var.r * e);
            if !self.eat(b'*') {
                return Ok(acc);
            }
            var = match self.var() {
                Some(v) => v,
                None => {
                    let found = self.describe();
                    return self.error(format!("expected P, Q or R, found {found}"));
                }
            };
        }
    }

    fn term(&mut self) -> Result<(Monomial, BigRational), ParseError> {
        if let Some(v) = self.var() {
            return Ok((self.monomial(v)?, BigRational::from_integer(1.into())));
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {}
            _ => {
                let found = self.describe();
                return self.error(format!("expected a coefficient or P, Q, R, found {found}"));
            }
        }
        let c = self.coeff()?;
        if !self.eat(b'*') {
            return Ok((Monomial::ONE, c));
        }
        match self.var() {
            Some(v) => Ok((self.monomial(v)?, c)),
            None => {
                let found = self.describe();
                self.error(format!("expected P, Q or R after '*', found {found}"))
            }
        }
    }
}

/// Parses a weight-homogeneous polynomial literal.
pub fn parse_form(text: &str) -> Result<QmPoly, ParseError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let mut terms: BTreeMap<Monomial, BigRational> = BTreeMap::new();
    let mut weight: Option<u32> = None;
    let mut negate = if parser.eat(b'-') {
        true
    } else {
        parser.eat(b'+');
        false
    };
    loop {
        let (m, c) = parser.term()?;
        match weight {
            None => weight = Some(m.weight()),
            Some(w) if w != m.weight() => {
                return Err(ParseError::MixedWeight {
                    first: w,
                    second: m.weight(),
                })
            }
            _ => {}
        }
        let c = if negate { -c } else { c };
        *terms.entry(m).or_insert_with(BigRational::zero) += c;
        negate = match parser.peek() {
            None => break,
            Some(b'+') => false,
            Some(b'-') => true,
            Some(_) => {
                let found = parser.describe();
                return parser.error(format!("expected '+', '-' or end of input, found {found}"));
            }
        };
        parser.pos += 1;
    }
    let weight = weight.expect("at least one term");
    let terms: Vec<_> = terms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    if terms.is_empty() {
        return Ok(QmPoly::zero(weight, Kind::HolomorphicP));
    }
    Ok(QmPoly::from_terms(terms, Kind::HolomorphicP).expect("homogeneity checked above"))
}
