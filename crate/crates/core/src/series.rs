//! Exact coefficient sequences and the generating-function laws used to
//! count shuffles, closures and pointed languages.
//!
//! All arithmetic is on arbitrary-precision rationals. Floating point only
//! appears inside [`estimate_growth`].

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::error::ParseError;

/// Whether a sequence holds ordinary (`c_n`) or exponential (`c_n / n!`)
/// coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Ogf,
    Egf,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Ogf => "ogf",
            Role::Egf => "egf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SeriesError {
    #[error("expected an {expected} sequence, got {found}")]
    RoleMismatch { expected: Role, found: Role },
    #[error("sequences have different roles ({0} vs {1})")]
    MixedRoles(Role, Role),
    #[error("quasi-inverse needs a zero constant term, found {0}")]
    NonzeroConstantTerm(BigRational),
    #[error("coefficient {index} is not strictly positive ({value})")]
    NonPositive { index: usize, value: BigRational },
    #[error("invalid growth window {start}..={end}: {reason}")]
    InvalidWindow {
        start: usize,
        end: usize,
        reason: &'static str,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A truncated power series `c_0 + c_1 z + … + c_N z^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffSeq {
    coeffs: Vec<BigRational>,
    role: Role,
}

impl CoeffSeq {
    pub fn new(coeffs: Vec<BigRational>, role: Role) -> Self {
        CoeffSeq { coeffs, role }
    }

    pub fn from_integers<I, T>(values: I, role: Role) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        CoeffSeq {
            coeffs: values
                .into_iter()
                .map(|v| BigRational::from_integer(v.into()))
                .collect(),
            role,
        }
    }

    pub fn from_naturals(values: Vec<BigUint>, role: Role) -> Self {
        Self::from_integers(values.into_iter().map(BigInt::from), role)
    }

    /// `z^n` truncated to `len` coefficients.
    pub fn delta(n: usize, len: usize, role: Role) -> Self {
        let mut coeffs = vec![BigRational::zero(); len];
        if n < len {
            coeffs[n] = BigRational::one();
        }
        CoeffSeq { coeffs, role }
    }

    pub fn ones(len: usize, role: Role) -> Self {
        CoeffSeq {
            coeffs: vec![BigRational::one(); len],
            role,
        }
    }

    pub fn zeros(len: usize, role: Role) -> Self {
        CoeffSeq {
            coeffs: vec![BigRational::zero(); len],
            role,
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigRational> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, n: usize) -> Option<&BigRational> {
        self.coeffs.get(n)
    }

    pub fn truncate(&self, len: usize) -> CoeffSeq {
        CoeffSeq {
            coeffs: self.coeffs.iter().take(len).cloned().collect(),
            role: self.role,
        }
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Integer coefficients, or `None` if any entry is fractional.
    pub fn to_bigints(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.to_integer()))
            .collect()
    }

    /// Coefficients as `i64`, or `None` if any is fractional or too large.
    pub fn to_integers(&self) -> Option<Vec<i64>> {
        self.to_bigints()?.iter().map(|c| c.to_i64()).collect()
    }

    fn require(&self, expected: Role) -> Result<(), SeriesError> {
        if self.role == expected {
            Ok(())
        } else {
            Err(SeriesError::RoleMismatch {
                expected,
                found: self.role,
            })
        }
    }
}

impl fmt::Display for CoeffSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[", self.role)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

fn factorials(len: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(len);
    let mut acc = BigInt::one();
    for n in 0..len {
        if n > 0 {
            acc *= n;
        }
        out.push(acc.clone());
    }
    out
}

/// Pascal rows `C(n, 0..=n)` for `n < len`.
fn pascal(len: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(len);
    for n in 0..len {
        let mut row = vec![BigInt::one(); n + 1];
        for k in 1..n {
            row[k] = &rows[n - 1][k - 1] + &rows[n - 1][k];
        }
        rows.push(row);
    }
    rows
}

/// Counts of `L1 ⧢ L2` from the counts of the operands:
/// `c[n] = Σ_k C(n, k) s[k] t[n-k]`.
pub fn binomial_convolution(s: &CoeffSeq, t: &CoeffSeq) -> Result<CoeffSeq, SeriesError> {
    s.require(Role::Ogf)?;
    t.require(Role::Ogf)?;
    let len = s.len().min(t.len());
    let binom = pascal(len);
    let coeffs = (0..len)
        .map(|n| {
            (0..=n)
                .map(|k| {
                    BigRational::from_integer(binom[n][k].clone()) * &s.coeffs[k] * &t.coeffs[n - k]
                })
                .fold(BigRational::zero(), |acc, x| acc + x)
        })
        .collect();
    Ok(CoeffSeq::new(coeffs, Role::Ogf))
}

/// Ordinary product of two series of the same role, truncated to the shorter.
pub fn cauchy_product(s: &CoeffSeq, t: &CoeffSeq) -> Result<CoeffSeq, SeriesError> {
    if s.role != t.role {
        return Err(SeriesError::MixedRoles(s.role, t.role));
    }
    let len = s.len().min(t.len());
    let coeffs = (0..len)
        .map(|n| {
            (0..=n)
                .filter(|&k| !s.coeffs[k].is_zero() && !t.coeffs[n - k].is_zero())
                .map(|k| &s.coeffs[k] * &t.coeffs[n - k])
                .fold(BigRational::zero(), |acc, x| acc + x)
        })
        .collect();
    Ok(CoeffSeq::new(coeffs, s.role))
}

/// Termwise product.
pub fn hadamard(s: &CoeffSeq, t: &CoeffSeq) -> Result<CoeffSeq, SeriesError> {
    if s.role != t.role {
        return Err(SeriesError::MixedRoles(s.role, t.role));
    }
    let coeffs = s.coeffs.iter().zip(&t.coeffs).map(|(a, b)| a * b).collect();
    Ok(CoeffSeq::new(coeffs, s.role))
}

/// Ordinary to exponential coefficients: `c_n / n!`.
pub fn borel(s: &CoeffSeq) -> Result<CoeffSeq, SeriesError> {
    s.require(Role::Ogf)?;
    let fact = factorials(s.len());
    let coeffs = s
        .coeffs
        .iter()
        .zip(fact)
        .map(|(c, f)| c / BigRational::from_integer(f))
        .collect();
    Ok(CoeffSeq::new(coeffs, Role::Egf))
}

/// Exponential to ordinary coefficients: `c_n · n!`.
pub fn laplace(s: &CoeffSeq) -> Result<CoeffSeq, SeriesError> {
    s.require(Role::Egf)?;
    let fact = factorials(s.len());
    let coeffs = s
        .coeffs
        .iter()
        .zip(fact)
        .map(|(c, f)| c * BigRational::from_integer(f))
        .collect();
    Ok(CoeffSeq::new(coeffs, Role::Ogf))
}

/// Shuffle counts through the exponential route: `laplace(borel(s) · borel(t))`.
pub fn egf_shuffle(s: &CoeffSeq, t: &CoeffSeq) -> Result<CoeffSeq, SeriesError> {
    s.require(Role::Ogf)?;
    t.require(Role::Ogf)?;
    laplace(&cauchy_product(&borel(s)?, &borel(t)?)?)
}

/// `1 / (1 - s)` for `s` with zero constant term.
pub fn quasi_inverse(s: &CoeffSeq) -> Result<CoeffSeq, SeriesError> {
    if let Some(c0) = s.coeffs.first() {
        if !c0.is_zero() {
            return Err(SeriesError::NonzeroConstantTerm(c0.clone()));
        }
    }
    // c = 1 + s·c, solved index by index since s_0 = 0.
    let len = s.len();
    let mut c: Vec<BigRational> = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = if n == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        };
        for k in 1..=n {
            if !s.coeffs[k].is_zero() {
                acc += &s.coeffs[k] * &c[n - k];
            }
        }
        c.push(acc);
    }
    Ok(CoeffSeq::new(c, s.role))
}

/// Number of quarter-plane walks of length `n` with unit N/S/E/W steps that
/// start at the origin and end anywhere: `C(n, ⌊n/2⌋) · C(n+1, ⌈n/2⌉)`.
pub fn closed_form_prefix_walks(n: usize) -> BigUint {
    let n_big = BigUint::from(n);
    let floor = BigUint::from(n / 2);
    let ceil = BigUint::from(n.div_ceil(2));
    num_integer::binomial(n_big.clone(), floor) * num_integer::binomial(n_big + 1u32, ceil)
}

/// Least-squares fit of `log c_n ≈ n log α + r log n + const`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthEstimate {
    pub alpha: f64,
    pub r: f64,
    pub log_kappa: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        x.to_f64().unwrap().ln()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

fn ln_positive(q: &BigRational) -> f64 {
    ln_biguint(q.numer().magnitude()) - ln_biguint(q.denom().magnitude())
}

pub fn estimate_growth(
    s: &CoeffSeq,
    window: RangeInclusive<usize>,
) -> Result<GrowthEstimate, SeriesError> {
    let (start, end) = (*window.start(), *window.end());
    let invalid = |reason| SeriesError::InvalidWindow { start, end, reason };
    if start == 0 {
        return Err(invalid("window must start at n >= 1"));
    }
    if end < start || end - start + 1 < 4 {
        return Err(invalid("window needs at least 4 points"));
    }
    if end >= s.len() {
        return Err(invalid("window extends past the sequence"));
    }
    let rows = end - start + 1;
    let mut design = DMatrix::<f64>::zeros(rows, 3);
    let mut logs = DVector::<f64>::zeros(rows);
    for (row, n) in window.enumerate() {
        let c = &s.coeffs[n];
        if !c.is_positive() {
            return Err(SeriesError::NonPositive {
                index: n,
                value: c.clone(),
            });
        }
        design[(row, 0)] = n as f64;
        design[(row, 1)] = (n as f64).ln();
        design[(row, 2)] = 1.0;
        logs[row] = ln_positive(c);
    }
    let svd = design.clone().svd(true, true);
    let params = svd
        .solve(&logs, 1e-12)
        .map_err(|_| invalid("degenerate least-squares system"))?;
    let fitted = &design * &params;
    let sq: f64 = (logs - fitted).iter().map(|e| e * e).sum();
    Ok(GrowthEstimate {
        alpha: params[0].exp(),
        r: params[1],
        log_kappa: params[2],
        residual: (sq / rows as f64).sqrt(),
    })
}

fn parse_rational(text: &str) -> Result<BigRational, ParseError> {
    let text = text.trim();
    BigRational::from_str(text)
        .map_err(|_| ParseError::new(format!("not an exact number: `{text}`")))
}

/// Reads a JSON array whose entries are decimal strings (`"3"`, `"-1/2"`) or
/// plain JSON integers.
pub fn parse_json(text: &str) -> Result<Vec<BigRational>, ParseError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ParseError::new(format!("invalid JSON: {e}")))?;
    let items = value
        .as_array()
        .ok_or_else(|| ParseError::new("expected a JSON array of coefficients"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| match item {
            serde_json::Value::String(s) => parse_rational(s),
            serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => {
                parse_rational(&n.to_string())
            }
            other => Err(ParseError::new(format!(
                "entry {i} must be an integer or a decimal string, got {other}"
            ))),
        })
        .collect()
}

/// Writes the exact JSON exchange form: an array of decimal strings.
pub fn to_json(s: &CoeffSeq) -> String {
    let items: Vec<serde_json::Value> = s
        .coeffs
        .iter()
        .map(|c| serde_json::Value::String(c.to_string()))
        .collect();
    serde_json::Value::Array(items).to_string()
}

/// Reads `n,value` lines; a header line and blank lines are skipped. Indices
/// must run 0, 1, 2, … in order.
pub fn parse_csv(text: &str) -> Result<Vec<BigRational>, ParseError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.eq_ignore_ascii_case("n,value") {
            continue;
        }
        let (idx, value) = line
            .split_once(',')
            .ok_or_else(|| ParseError::at_line(lineno + 1, "expected `n,value`"))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| ParseError::at_line(lineno + 1, format!("bad index `{idx}`")))?;
        if idx != out.len() {
            return Err(ParseError::at_line(
                lineno + 1,
                format!("expected index {}, found {idx}", out.len()),
            ));
        }
        out.push(parse_rational(value).map_err(|e| e.with_line(lineno + 1))?);
    }
    Ok(out)
}

pub fn to_csv(s: &CoeffSeq) -> String {
    let mut out = String::from("n,value\n");
    for (n, c) in s.coeffs.iter().enumerate() {
        out.push_str(&format!("{n},{c}\n"));
    }
    out
}

/// Parses either exchange form, guessing from the first non-blank character.
pub fn parse_sequence(text: &str) -> Result<Vec<BigRational>, ParseError> {
    if text.trim_start().starts_with('[') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}
