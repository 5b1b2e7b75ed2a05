//! Real polynomials in the field values and the small expression language
//! used to enter potentials.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary ("*" unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" integer)?
//! atom   := number | field | "(" expr ")"
//! field  := "phi" | "phi1" | "phi2" | ...      ("phi" is "phi1")
//! ```
//!
//! Example: `0.5 * phi1^2 + 0.25*phi1^4 - 0.1*phi1*phi2^2`.

use std::collections::BTreeMap;
use std::fmt;

use crate::{Error, Result};

/// Σ c · Π φ_a^{e_a}. Exponent vectors have one entry per field.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    n_fields: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(n_fields: usize) -> Self {
        Self {
            n_fields,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_fields: usize, c: f64) -> Self {
        let mut p = Self::zero(n_fields);
        p.add_term(vec![0; n_fields], c);
        p
    }

    /// The single field `phi_{a+1}`.
    pub fn field(n_fields: usize, a: usize) -> Self {
        let mut e = vec![0; n_fields];
        e[a] = 1;
        let mut p = Self::zero(n_fields);
        p.add_term(e, 1.0);
        p
    }

    /// Builds from (exponents, coefficient) pairs; repeated exponents are summed.
    pub fn from_terms(n_fields: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut p = Self::zero(n_fields);
        for (e, c) in terms {
            if e.len() != n_fields {
                return Err(Error::Config(format!(
                    "monomial has {} exponents, expected {n_fields}",
                    e.len()
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        let entry = self.terms.entry(e).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_finite(&self) -> bool {
        self.terms.values().all(|c| c.is_finite())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n_fields);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n_fields);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.n_fields, 1.0), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, phi: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * monomial(e, phi))
            .sum()
    }

    /// ∂V/∂φ_a, analytically.
    pub fn partial(&self, a: usize, phi: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(e, _)| e[a] > 0)
            .map(|(e, c)| {
                let mut d = e.clone();
                d[a] -= 1;
                c * f64::from(e[a]) * monomial(&d, phi)
            })
            .sum()
    }

    pub fn gradient(&self, phi: &[f64]) -> Vec<f64> {
        (0..self.n_fields).map(|a| self.partial(a, phi)).collect()
    }

    /// Coefficient of the monomial with exponents `e` (zero if absent).
    pub fn coefficient(&self, e: &[u32]) -> f64 {
        self.terms.get(e).copied().unwrap_or(0.0)
    }

    pub fn parse(src: &str, n_fields: usize) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            n_fields,
        };
        let out = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Config(format!(
                "potential `{src}`: unexpected trailing input at token {}",
                p.pos + 1
            )));
        }
        Ok(out)
    }
}

fn monomial(e: &[u32], phi: &[f64]) -> f64 {
    e.iter()
        .zip(phi)
        .filter(|(k, _)| **k > 0)
        .map(|(k, x)| x.powi(*k as i32))
        .product()
}

impl fmt::Display for Polynomial {
    /// Canonical form, terms ordered by total degree then exponents.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut keys: Vec<_> = self.terms.keys().collect();
        keys.sort_by_key(|e| (e.iter().sum::<u32>(), std::cmp::Reverse((*e).clone())));
        for (i, e) in keys.into_iter().enumerate() {
            let c = self.terms[e];
            if i == 0 {
                write!(f, "{c}")?;
            } else if c < 0.0 {
                write!(f, " - {}", -c)?;
            } else {
                write!(f, " + {c}")?;
            }
            for (a, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*phi{}", a + 1)?,
                    k => write!(f, "*phi{}^{k}", a + 1)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Field(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent part, e.g. 1e-3
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v = s
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("potential: bad number `{s}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let idx = match s.strip_prefix("phi") {
                    Some("") => 0,
                    Some(n) => match n.parse::<usize>() {
                        Ok(k) if k >= 1 => k - 1,
                        _ => return Err(Error::Config(format!("potential: unknown symbol `{s}`"))),
                    },
                    None => return Err(Error::Config(format!("potential: unknown symbol `{s}`"))),
                };
                out.push(Tok::Field(idx));
            }
            other => return Err(Error::Config(format!("potential: unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    n_fields: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.scale(-1.0));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.scale(-1.0));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(k)) if k >= 0.0 && k.fract() == 0.0 && k <= 64.0 => return Ok(base.pow(k as u32)),
                _ => return Err(Error::Config("potential: `^` needs a non-negative integer exponent".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Polynomial::constant(self.n_fields, v)),
            Some(Tok::Field(a)) => {
                if a >= self.n_fields {
                    return Err(Error::Config(format!(
                        "potential: field phi{} out of range (n_fields = {})",
                        a + 1,
                        self.n_fields
                    )));
                }
                Ok(Polynomial::field(self.n_fields, a))
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Config("potential: missing `)`".into())),
                }
            }
            Some(t) => Err(Error::Config(format!("potential: unexpected token {t:?}"))),
            None => Err(Error::Config("potential: unexpected end of expression".into())),
        }
    }
}
