//! Order-by-order solution of the coefficient equations
//! `t_n = q_n + Σ c · (m)_i · t_m`, `m = n − a + i`, one term per monomial
//! `c·z^a·T^(i)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::series::{CoeffSeq, Role};

use super::{Ode, OdeError, Poly};

fn falling(m: usize, i: usize) -> BigInt {
    (0..i).fold(BigInt::one(), |acc, j| {
        acc * BigInt::from(m as i64 - j as i64)
    })
}

/// `E_n` as sparse coefficients over unknown indices, plus its right-hand
/// side.
fn equation(ode: &Ode, n: usize) -> (BTreeMap<usize, BigRational>, BigRational) {
    let mut row: BTreeMap<usize, BigRational> = BTreeMap::new();
    let mut add = |m: usize, c: BigInt| {
        let slot = row.entry(m).or_insert_with(BigRational::zero);
        *slot += BigRational::from_integer(c);
    };
    add(n, BigInt::one());
    for (i, a, c) in ode.monomials() {
        let a = a as usize;
        if n < a {
            continue;
        }
        let m = n - a + i;
        let k = falling(m, i);
        if !k.is_zero() {
            add(m, -(c * k));
        }
    }
    row.retain(|_, v| !v.is_zero());
    (row, BigRational::from_integer(ode.q.coeff(n as u32)))
}

/// The coefficient of `t_{n+d}` in `E_n` as a polynomial in `n`, valid once
/// `n` is at least every `a` involved.
fn shift_poly(ode: &Ode, d: i64) -> Poly {
    let mut p = if d == 0 {
        Poly::constant(1)
    } else {
        Poly::zero()
    };
    for (i, a, c) in ode.monomials() {
        if i as i64 - a as i64 != d {
            continue;
        }
        // (n + d)(n + d − 1)…(n + d − i + 1)
        let mut f = Poly::constant(1);
        for j in 0..i as i64 {
            f = f.mul(&Poly::from_coeffs([BigInt::from(d - j), BigInt::one()]));
        }
        p = p.sub(&f.scale(c));
    }
    p
}

fn eval(p: &Poly, n: usize) -> BigInt {
    p.terms().fold(BigInt::zero(), |acc, (a, c)| {
        acc + c * BigInt::from(n).pow(a)
    })
}

/// Largest nonnegative integer root, by scanning up to the Cauchy bound.
fn largest_root(p: &Poly) -> Option<usize> {
    let lead_deg = p.degree()?;
    let lead = p.coeff(lead_deg).abs();
    let bound = p
        .terms()
        .filter(|&(a, _)| a != lead_deg)
        .map(|(_, c)| (c.abs() + &lead - 1u32) / &lead)
        .max()
        .unwrap_or_default()
        + 1u32;
    let bound: usize = bound.try_into().unwrap_or(usize::MAX);
    (0..=bound).rev().find(|&n| eval(p, n).is_zero())
}

/// How many equations make the truncated system equivalent to the infinite
/// one on the first `max_n + 1` unknowns, and the largest index shift.
fn system_size(ode: &Ode, max_n: usize) -> (usize, usize) {
    let max_a = ode
        .monomials()
        .map(|(_, a, _)| a as usize)
        .max()
        .unwrap_or(0);
    let shifts = (0..=ode.order() as i64).rev();
    for d in shifts {
        let p = shift_poly(ode, d);
        if p.is_zero() {
            continue;
        }
        let root = largest_root(&p).unwrap_or(0);
        return (max_n.max(max_a).max(root), d as usize);
    }
    // No equation ever introduces a new highest unknown; check a margin of
    // extra equations.
    (max_n.max(max_a) + ode.order() + 2, 0)
}

/// Row with pivot `p`: `t_p + Σ coeffs[j]·t_j = rhs` with every `j < p`.
struct Row {
    coeffs: BTreeMap<usize, BigRational>,
    rhs: BigRational,
}

fn reduce(coeffs: &mut BTreeMap<usize, BigRational>, rhs: &mut BigRational, col: usize, row: &Row) {
    let Some(k) = coeffs.remove(&col) else { return };
    for (&j, v) in &row.coeffs {
        let slot = coeffs.entry(j).or_insert_with(BigRational::zero);
        *slot -= &k * v;
        if slot.is_zero() {
            coeffs.remove(&j);
        }
    }
    *rhs -= &k * &row.rhs;
}

/// The unique series solution up to `z^max_n`.
pub fn ode_series(ode: &Ode, max_n: usize) -> Result<CoeffSeq, OdeError> {
    let (n_eqs, _) = system_size(ode, max_n);
    let mut rows: BTreeMap<usize, Row> = BTreeMap::new();
    for n in 0..=n_eqs {
        let (mut coeffs, mut rhs) = equation(ode, n);
        loop {
            let Some((&col, _)) = coeffs.iter().next_back() else {
                if !rhs.is_zero() {
                    return Err(OdeError::Inconsistent { index: n });
                }
                break;
            };
            if let Some(row) = rows.get(&col) {
                reduce(&mut coeffs, &mut rhs, col, row);
                continue;
            }
            let lead = coeffs.remove(&col).unwrap();
            for v in coeffs.values_mut() {
                *v /= &lead;
            }
            rhs /= &lead;
            rows.insert(col, Row { coeffs, rhs });
            break;
        }
    }

    // Back-substitute so every row mentions free unknowns only.
    let pivots: Vec<usize> = rows.keys().copied().collect();
    for &p in &pivots {
        let mut row = rows.remove(&p).unwrap();
        let cols: Vec<usize> = row
            .coeffs
            .keys()
            .copied()
            .filter(|c| rows.contains_key(c))
            .collect();
        for c in cols {
            reduce(&mut row.coeffs, &mut row.rhs, c, &rows[&c]);
        }
        rows.insert(p, row);
    }

    let mut out = Vec::with_capacity(max_n + 1);
    for k in 0..=max_n {
        match rows.get(&k) {
            Some(row) if row.coeffs.is_empty() => out.push(row.rhs.clone()),
            _ => return Err(OdeError::Underdetermined { index: k }),
        }
    }
    Ok(CoeffSeq::new(out, Role::Ogf))
}

/// `t_n − q_n − Σ q_i T^(i)` coefficientwise, for every `n` whose equation
/// only involves coefficients present in `t`.
pub fn residual(ode: &Ode, t: &CoeffSeq) -> Vec<BigRational> {
    let mut out = Vec::new();
    for n in 0.. {
        let (coeffs, rhs) = equation(ode, n);
        if coeffs.keys().any(|&m| m >= t.len()) || n >= t.len() {
            break;
        }
        let lhs: BigRational = coeffs.iter().map(|(&m, c)| c * &t.coeffs()[m]).sum();
        out.push(lhs - rhs);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(text: &str, max_n: usize) -> Result<Vec<i64>, OdeError> {
        ode_series(&Ode::parse(text).unwrap(), max_n).map(|s| s.to_integers().unwrap())
    }

    #[test]
    fn factorials() {
        assert_eq!(
            solve("T = 1 + z*T + z^2*T'", 6).unwrap(),
            vec![1, 1, 2, 6, 24, 120, 720]
        );
    }

    #[test]
    fn geometric() {
        assert_eq!(solve("T = 1 + z*T", 5).unwrap(), vec![1; 6]);
        assert_eq!(solve("T = 1 - z*T", 4).unwrap(), vec![1, -1, 1, -1, 1]);
    }

    #[test]
    fn shifted_factorials() {
        assert_eq!(
            solve("T = 1 + 2*z*T + z^2*T'", 5).unwrap(),
            vec![1, 2, 6, 24, 120, 720]
        );
    }

    #[test]
    fn rational_solutions() {
        let s = ode_series(&Ode::parse("T = 1 - T").unwrap(), 2).unwrap();
        assert_eq!(s.coeffs()[0], BigRational::new(1.into(), 2.into()));
        assert!(s.coeffs()[1].is_zero());
        let s = ode_series(&Ode::parse("T = 1 + 1/2*z*T").unwrap(), 3).unwrap();
        assert_eq!(s.coeffs()[3], BigRational::new(1.into(), 8.into()));
    }

    #[test]
    fn derivatives_without_shift() {
        // t_n = (n+1) t_{n+1}: every multiple of exp(z) works.
        assert_eq!(
            solve("T = T'", 3),
            Err(OdeError::Underdetermined { index: 0 })
        );
        // t_n (1 − n) = [n=0]: t_1 is free.
        assert_eq!(
            solve("T = 1 + z*T'", 3),
            Err(OdeError::Underdetermined { index: 1 })
        );
        // t_n (1 − 2n) = [n=0]: never vanishes.
        assert_eq!(solve("T = 1 + 2*z*T'", 3).unwrap(), vec![1, 0, 0, 0]);
        // (1 − n) t_n + (n+1) n t_{n+1} = [n=0] + [n=3]: t_1 appears nowhere.
        assert_eq!(
            solve("T = 1 + z*T' - z*T'' + z^3", 3),
            Err(OdeError::Underdetermined { index: 1 })
        );
    }

    #[test]
    fn inconsistent_and_free() {
        assert_eq!(
            solve("T = 1 + T", 3),
            Err(OdeError::Inconsistent { index: 0 })
        );
        assert_eq!(
            solve("T = T", 3),
            Err(OdeError::Underdetermined { index: 0 })
        );
        // (1 − n) t_n = [n = 1] has no solution at n = 1.
        assert_eq!(
            solve("T = z^1 + z*T'", 3),
            Err(OdeError::Inconsistent { index: 1 })
        );
    }

    #[test]
    fn residual_vanishes() {
        let ode = Ode::parse("T = 1 - 2*z + z^2 + (1 + z)*z*T + 2*z^2*T'").unwrap();
        let t = ode_series(&ode, 10).unwrap();
        let r = residual(&ode, &t);
        assert_eq!(r.len(), 11);
        assert!(r.iter().all(Zero::is_zero));
    }

    #[test]
    fn root_bound() {
        let p = Poly::from_coeffs([6, -5, 1]);
        assert_eq!(largest_root(&p), Some(3));
        assert_eq!(largest_root(&Poly::from_coeffs([1, 1])), None);
        assert_eq!(largest_root(&Poly::constant(3)), None);
    }
}
