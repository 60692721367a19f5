//! Expression grammar shared by field tables, session files and reports.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? INT)?
//! atom   := INT | IDENT | '(' expr ')' | 'd' '[' IDENT ']' ('^' INT)? '(' expr ')'
//! ```
//!
//! `d[dt](f)` is the formal total derivative of `f`, so `d[dt](d[dw](x))`
//! and `d[dw](d[dt](x))` denote the same derivative variable. Printing emits
//! exactly this grammar, so `parse(print(f)) == f`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::coeffield::FieldDescriptor;
use crate::poly::{DerivativeVar, Monomial, Poly, Rat, Symbol, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("at offset {offset}: expected {expected}, found {found}")]
    Unexpected {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("at offset {offset}: undefined symbol `{name}`")]
    UndefinedSymbol { offset: usize, name: String },
    #[error("at offset {offset}: unknown derivation `{name}`")]
    UnknownDerivation { offset: usize, name: String },
    #[error("at offset {offset}: derivative operator not allowed here")]
    DerivativeNotAllowed { offset: usize },
    #[error("at offset {offset}: division by zero")]
    DivisionByZero { offset: usize },
    #[error("at offset {offset}: exponent out of range")]
    BadExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Unexpected { offset, .. }
            | ParseError::UndefinedSymbol { offset, .. }
            | ParseError::UnknownDerivation { offset, .. }
            | ParseError::DerivativeNotAllowed { offset }
            | ParseError::DivisionByZero { offset }
            | ParseError::BadExponent { offset } => *offset,
        }
    }
}

/// Name resolution for the parser.
#[derive(Clone, Copy)]
pub struct Scope<'a> {
    field: Option<&'a FieldDescriptor>,
    gens: &'a [Symbol],
    indets: &'a [Symbol],
}

impl<'a> Scope<'a> {
    /// Generators and indeterminates; derivative operators are resolved
    /// against the field's derivations.
    pub fn new(field: &'a FieldDescriptor, indets: &'a [Symbol]) -> Self {
        Scope {
            field: Some(field),
            gens: field.generators(),
            indets,
        }
    }

    /// Only bare generators; used while a field table is being declared.
    pub fn generators_only(gens: &'a [Symbol]) -> Self {
        Scope {
            field: None,
            gens,
            indets: &[],
        }
    }

    fn resolve(&self, name: &str) -> Option<Var> {
        if let Some(g) = self.gens.iter().find(|g| g.name() == name) {
            return Some(Var::Gen(g.clone()));
        }
        self.indets
            .iter()
            .find(|s| s.name() == name)
            .map(|s| Var::indet(s.clone()))
    }
}

pub fn parse(src: &str, scope: &Scope<'_>) -> Result<Rat, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        scope,
    };
    let r = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.unexpected("operator or end of input"));
    }
    Ok(r)
}

/// Parse a parenthesized, comma separated tuple `(e1, e2, …)`.
pub fn parse_tuple(src: &str, scope: &Scope<'_>) -> Result<Vec<Rat>, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        scope,
    };
    p.expect(b'(')?;
    let mut out = Vec::new();
    p.skip_ws();
    if p.peek() == Some(b')') {
        p.pos += 1;
    } else {
        loop {
            out.push(p.expr()?);
            p.skip_ws();
            match p.peek() {
                Some(b',') => p.pos += 1,
                Some(b')') => {
                    p.pos += 1;
                    break;
                }
                _ => return Err(p.unexpected("`,` or `)`")),
            }
        }
    }
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.unexpected("end of input"));
    }
    Ok(out)
}

struct Parser<'s, 'a> {
    src: &'s [u8],
    pos: usize,
    scope: &'s Scope<'a>,
}

impl Parser<'_, '_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let found = match self.src.get(self.pos) {
            None => "end of input".to_string(),
            Some(c) => format!("`{}`", *c as char),
        };
        ParseError::Unexpected {
            offset: self.pos,
            expected: expected.to_string(),
            found,
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Rat, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Rat, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let rhs = self.unary()?;
                    acc = acc
                        .checked_div(&rhs)
                        .map_err(|_| ParseError::DivisionByZero { offset: at })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Rat, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Rat, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let at = self.pos;
            let e = self.exponent()?;
            return base
                .pow(e)
                .map_err(|_| ParseError::DivisionByZero { offset: at });
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let at = self.pos;
        let n = self.integer()?;
        let e: i32 = n
            .try_into()
            .map_err(|_| ParseError::BadExponent { offset: at })?;
        if e > 10_000 {
            return Err(ParseError::BadExponent { offset: at });
        }
        Ok(if neg { -e } else { e })
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.unexpected("integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(s.parse().expect("digits parse"))
    }

    fn ident(&mut self) -> Result<(usize, String), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphabetic() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric()
                    || self.src[self.pos] == b'_'
                    || self.src[self.pos] == b'\'')
            {
                self.pos += 1;
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii ident");
            return Ok((start, s.to_string()));
        }
        Err(self.unexpected("identifier"))
    }

    fn atom(&mut self) -> Result<Rat, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let r = self.expr()?;
                self.expect(b')')?;
                Ok(r)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(Rat::from_rational(BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let (at, name) = self.ident()?;
                if name == "d" && self.peek() == Some(b'[') {
                    return self.derivative(at);
                }
                self.scope
                    .resolve(&name)
                    .map(Rat::var)
                    .ok_or(ParseError::UndefinedSymbol { offset: at, name })
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn derivative(&mut self, at: usize) -> Result<Rat, ParseError> {
        let field = self
            .scope
            .field
            .ok_or(ParseError::DerivativeNotAllowed { offset: at })?;
        self.expect(b'[')?;
        let (dat, dname) = self.ident()?;
        let k = field
            .derivation_index(&dname)
            .ok_or(ParseError::UnknownDerivation {
                offset: dat,
                name: dname,
            })?;
        self.expect(b']')?;
        let times = if self.peek() == Some(b'^') {
            self.pos += 1;
            let eat = self.pos;
            let n = self.integer()?;
            u32::try_from(n).map_err(|_| ParseError::BadExponent { offset: eat })?
        } else {
            1
        };
        self.expect(b'(')?;
        let mut r = self.expr()?;
        self.expect(b')')?;
        for _ in 0..times {
            r = field.derive(k, &r);
        }
        Ok(r)
    }
}

/// Canonical text of a derivative variable, e.g. `d[dw](d[dt]^2(x))`.
pub fn format_der(d: &DerivativeVar, field: &FieldDescriptor) -> String {
    let mut s = d.indet.name().to_string();
    for (k, e) in d.ops.powers() {
        let name = field
            .derivations()
            .get(k)
            .map(|x| x.name.as_str())
            .unwrap_or("?");
        s = if e == 1 {
            format!("d[{name}]({s})")
        } else {
            format!("d[{name}]^{e}({s})")
        };
    }
    s
}

pub fn format_var(v: &Var, field: &FieldDescriptor) -> String {
    match v {
        Var::Gen(g) => g.name().to_string(),
        Var::Der(d) => format_der(d, field),
    }
}

fn format_monomial(m: &Monomial, field: &FieldDescriptor) -> String {
    m.factors()
        .iter()
        .rev()
        .map(|(v, e)| {
            let s = format_var(v, field);
            if *e == 1 {
                s
            } else {
                format!("{s}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// Terms in decreasing monomial order, joined with ` + ` / ` - `.
pub fn format_poly(p: &Poly, field: &FieldDescriptor) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        let body = if m.is_one() {
            a.to_string()
        } else if a.is_one() {
            format_monomial(m, field)
        } else {
            format!("{}*{}", a, format_monomial(m, field))
        };
        match (i, neg) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push('-');
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (_, true) => {
                out.push_str(" - ");
                out.push_str(&body);
            }
        }
    }
    out
}

pub fn format_rat(r: &Rat, field: &FieldDescriptor) -> String {
    let num = format_poly(r.numer(), field);
    if r.denom().is_one() {
        return num;
    }
    let num = if r.numer().num_terms() > 1 {
        format!("({num})")
    } else {
        num
    };
    let d = r.denom();
    let den = format_poly(d, field);
    let bare = d.num_terms() == 1
        && d.terms()
            .next()
            .map(|(m, _)| m.factors().len() == 1)
            .unwrap_or(false);
    if bare {
        format!("{num}/{den}")
    } else {
        format!("{num}/({den})")
    }
}

/// `(a, b, …)` with canonical components.
pub fn format_tuple(items: &[Rat], field: &FieldDescriptor) -> String {
    let parts: Vec<String> = items.iter().map(|r| format_rat(r, field)).collect();
    format!("({})", parts.join(", "))
}
