//! Linear differential equations `T = q + q_0 T + q_1 T' + … + q_n T^(n)`
//! with integer polynomial coefficients: exact series solutions, splitting
//! into two equations with nonnegative coefficients, and compilation of
//! those into pointing grammars.

mod compile;
mod parse;
mod solve;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::error::ParseError;
use crate::grammar::GrammarError;

pub use compile::{
    ode_to_grammar, recombine, split_ode, verify_many, verify_ode_grammar, OdeGrammars, Side,
    SplitSystem, SplitTerm, TermKind, VerifyReport,
};
pub use solve::{ode_series, residual};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum OdeError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("coefficient t_{index} is not determined by the equation")]
    Underdetermined { index: usize },
    #[error("the equation for z^{index} has no solution")]
    Inconsistent { index: usize },
    #[error("term `{term}` does not raise length (needs a z-power above its derivative order), so it has no counting grammar")]
    Unguarded { term: String },
    #[error("coefficient {coefficient} is too large to expand into rule copies")]
    TooManyCopies { coefficient: BigInt },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
}

/// A polynomial in `z` with integer coefficients, stored sparsely.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    terms: BTreeMap<u32, BigInt>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn monomial(c: impl Into<BigInt>, a: u32) -> Self {
        let mut p = Poly::zero();
        p.add_term(a, c.into());
        p
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Poly::monomial(c, 0)
    }

    /// From dense coefficients, lowest degree first.
    pub fn from_coeffs<I, T>(coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut p = Poly::zero();
        for (a, c) in coeffs.into_iter().enumerate() {
            p.add_term(a as u32, c.into());
        }
        p
    }

    pub fn add_term(&mut self, a: u32, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(a).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&a);
        }
    }

    pub fn coeff(&self, a: u32) -> BigInt {
        self.terms.get(&a).cloned().unwrap_or_default()
    }

    /// Nonzero `(power, coefficient)` pairs in increasing power.
    pub fn terms(&self) -> impl Iterator<Item = (u32, &BigInt)> {
        self.terms.iter().map(|(&a, c)| (a, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (a, c) in other.terms() {
            out.add_term(a, c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(&a, c)| (a, -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        let mut out = Poly::zero();
        for (a, c) in self.terms() {
            out.add_term(a, c * k);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, c) in self.terms() {
            for (b, d) in other.terms() {
                out.add_term(a + b, c * d);
            }
        }
        out
    }
}

/// `c*z^a` in the ODE text syntax, with `suffix` appended as a further
/// factor. Returns the sign separately.
fn monomial_text(c: &BigInt, a: u32, suffix: &str) -> (bool, String) {
    let mag = c.abs();
    let mut factors = Vec::new();
    if !mag.is_one() || (a == 0 && suffix.is_empty()) {
        factors.push(mag.to_string());
    }
    match a {
        0 => {}
        1 => factors.push("z".to_string()),
        _ => factors.push(format!("z^{a}")),
    }
    if !suffix.is_empty() {
        factors.push(suffix.to_string());
    }
    (c.is_negative(), factors.join("*"))
}

fn write_sum(f: &mut fmt::Formatter<'_>, parts: &[(bool, String)]) -> fmt::Result {
    if parts.is_empty() {
        return f.write_str("0");
    }
    for (k, (neg, text)) in parts.iter().enumerate() {
        match (k, neg) {
            (0, false) => f.write_str(text)?,
            (0, true) => write!(f, "-{text}")?,
            (_, false) => write!(f, " + {text}")?,
            (_, true) => write!(f, " - {text}")?,
        }
    }
    Ok(())
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<_> = self.terms().map(|(a, c)| monomial_text(c, a, "")).collect();
        write_sum(f, &parts)
    }
}

/// `T = q + Σ qs[i] · T^(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ode {
    pub q: Poly,
    pub qs: Vec<Poly>,
}

impl Ode {
    /// Trailing zero coefficients are dropped, keeping at least `q_0`.
    pub fn new(q: Poly, mut qs: Vec<Poly>) -> Self {
        while qs.len() > 1 && qs.last().is_some_and(Poly::is_zero) {
            qs.pop();
        }
        if qs.is_empty() {
            qs.push(Poly::zero());
        }
        Ode { q, qs }
    }

    pub fn order(&self) -> usize {
        self.qs.len() - 1
    }

    pub fn parse(text: &str) -> Result<Ode, OdeError> {
        parse::parse_ode(text)
    }

    /// Every monomial `c·z^a·T^(i)` as `(i, a, c)`.
    pub fn monomials(&self) -> impl Iterator<Item = (usize, u32, &BigInt)> {
        self.qs
            .iter()
            .enumerate()
            .flat_map(|(i, p)| p.terms().map(move |(a, c)| (i, a, c)))
    }

    /// The first monomial `z^a·T^(i)` with `a <= i`, if any. Such a term
    /// keeps or lowers length, so no pointing grammar counts it.
    pub fn unguarded_term(&self) -> Option<String> {
        self.monomials()
            .find(|&(i, a, _)| a as usize <= i)
            .map(|(i, a, c)| monomial_text(c, a, &derivative_text(i)).1)
    }
}

pub(crate) fn derivative_text(i: usize) -> String {
    format!("T{}", "'".repeat(i))
}

impl fmt::Display for Ode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<_> = self
            .q
            .terms()
            .map(|(a, c)| monomial_text(c, a, ""))
            .collect();
        for (i, p) in self.qs.iter().enumerate() {
            let t = derivative_text(i);
            parts.extend(p.terms().map(|(a, c)| monomial_text(c, a, &t)));
        }
        f.write_str("T = ")?;
        write_sum(f, &parts)
    }
}

impl FromStr for Ode {
    type Err = OdeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ode::parse(s)
    }
}
