//! Sign splitting `T = P − N` and compilation of the two equations into
//! pointing grammars.

use std::fmt;
use std::thread;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::grammar::{enumerate, Grammar, Item, Rule};
use crate::series::CoeffSeq;
use crate::word::{CountView, Letter, Symbol, Word};

use super::{derivative_text, ode_series, Ode, OdeError, Poly};

/// Largest coefficient expanded into copies of a rule.
const MAX_COPIES: u64 = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    P,
    N,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::P => Side::N,
            Side::N => Side::P,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::P => "P",
            Side::N => "N",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Source,
    Derivative { order: usize, target: Side },
}

/// `coeff · z^power · X`, where `X` is `1` or a derivative of `P` or `N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SplitTerm {
    pub coeff: BigInt,
    pub power: u32,
    pub kind: TermKind,
}

/// `P = q⁺ + Σ q_i⁺ P^(i) + Σ q_i⁻ N^(i)` and
/// `N = q⁻ + Σ q_i⁻ P^(i) + Σ q_i⁺ N^(i)`, every coefficient positive.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SplitSystem {
    pub p_rules: Vec<SplitTerm>,
    pub n_rules: Vec<SplitTerm>,
}

impl SplitSystem {
    pub fn rules(&self, side: Side) -> &[SplitTerm] {
        match side {
            Side::P => &self.p_rules,
            Side::N => &self.n_rules,
        }
    }

    fn rules_mut(&mut self, side: Side) -> &mut Vec<SplitTerm> {
        match side {
            Side::P => &mut self.p_rules,
            Side::N => &mut self.n_rules,
        }
    }
}

impl fmt::Display for SplitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for side in [Side::P, Side::N] {
            let parts: Vec<String> = self
                .rules(side)
                .iter()
                .map(|t| {
                    let x = match t.kind {
                        TermKind::Source => String::new(),
                        TermKind::Derivative { order, target } => {
                            derivative_text(order).replacen('T', target.name(), 1)
                        }
                    };
                    super::monomial_text(&t.coeff, t.power, &x).1
                })
                .collect();
            let rhs = if parts.is_empty() {
                "0".to_string()
            } else {
                parts.join(" + ")
            };
            writeln!(f, "{side} = {rhs}")?;
        }
        Ok(())
    }
}

pub fn split_ode(ode: &Ode) -> SplitSystem {
    let mut sys = SplitSystem::default();
    for (a, c) in ode.q.terms() {
        let side = if c.is_positive() { Side::P } else { Side::N };
        sys.rules_mut(side).push(SplitTerm {
            coeff: c.abs(),
            power: a,
            kind: TermKind::Source,
        });
    }
    for (i, a, c) in ode.monomials() {
        for side in [Side::P, Side::N] {
            let target = if c.is_positive() { side } else { side.other() };
            sys.rules_mut(side).push(SplitTerm {
                coeff: c.abs(),
                power: a,
                kind: TermKind::Derivative { order: i, target },
            });
        }
    }
    sys
}

/// The equation satisfied by `P − N`. The `N` equation mirrors the
/// derivative terms of the `P` equation, so those are read from `p_rules`.
pub fn recombine(sys: &SplitSystem) -> Ode {
    let mut q = Poly::zero();
    let mut qs: Vec<Poly> = Vec::new();
    for (side, sign) in [(Side::P, 1), (Side::N, -1)] {
        for t in sys.rules(side) {
            match t.kind {
                TermKind::Source => q.add_term(t.power, &t.coeff * sign),
                TermKind::Derivative { order, target } if side == Side::P => {
                    if qs.len() <= order {
                        qs.resize(order + 1, Poly::zero());
                    }
                    let sign = if target == Side::P { 1 } else { -1 };
                    qs[order].add_term(t.power, &t.coeff * sign);
                }
                TermKind::Derivative { .. } => {}
            }
        }
    }
    Ode::new(q, qs)
}

/// The grammars for `P` and `N`, sharing one rule set.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeGrammars {
    pub p: Grammar,
    pub n: Grammar,
}

impl OdeGrammars {
    pub fn side(&self, side: Side) -> &Grammar {
        match side {
            Side::P => &self.p,
            Side::N => &self.n,
        }
    }
}

fn fresh_word(rule: usize, len: u32) -> Word {
    Word::from_letters(
        (0..len)
            .map(|k| {
                Letter::new(Symbol::new(&format!("x{rule}_{k}")).expect("fresh letter name fits"))
            })
            .collect(),
    )
}

/// Compiles each split monomial `c·z^a·R^(k)` into `c` rules
/// `R̃ -> "x{j}_0 … x{j}_{a-1}" point^k(R)`, one fresh rule index `j` per
/// copy. Sides that derive nothing are dropped with the rules using them.
pub fn ode_to_grammar(ode: &Ode) -> Result<OdeGrammars, OdeError> {
    if let Some(term) = ode.unguarded_term() {
        return Err(OdeError::Unguarded { term });
    }
    let sys = split_ode(ode);

    let mut productive = [false, false];
    loop {
        let mut changed = false;
        for side in [Side::P, Side::N] {
            let live = sys.rules(side).iter().any(|t| match t.kind {
                TermKind::Source => true,
                TermKind::Derivative { target, .. } => productive[target as usize],
            });
            if live && !productive[side as usize] {
                productive[side as usize] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut rules = Vec::new();
    let mut j = 0usize;
    for side in [Side::P, Side::N] {
        if !productive[side as usize] {
            continue;
        }
        for t in sys.rules(side) {
            let tail = match t.kind {
                TermKind::Source => None,
                TermKind::Derivative { order, target } => {
                    if !productive[target as usize] {
                        continue;
                    }
                    Some(Item::point_n(Item::nt(target.name()), order))
                }
            };
            let copies = t
                .coeff
                .to_u64()
                .filter(|&c| c <= MAX_COPIES)
                .ok_or_else(|| OdeError::TooManyCopies {
                    coefficient: t.coeff.clone(),
                })?;
            for _ in 0..copies {
                let mut items = Vec::new();
                if t.power > 0 {
                    items.push(Item::Word(fresh_word(j, t.power)));
                }
                items.extend(tail.clone());
                rules.push(Rule::new(side.name(), items));
                j += 1;
            }
        }
    }

    let build = |side: Side| -> Result<Grammar, OdeError> {
        if productive[side as usize] {
            Ok(Grammar::new(side.name(), rules.clone())?)
        } else {
            Ok(Grammar::empty(side.name()))
        }
    };
    Ok(OdeGrammars {
        p: build(Side::P)?,
        n: build(Side::N)?,
    })
}

/// Outcome of comparing `p(n) − n(n)` with the series solution.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub pass: bool,
    pub expected: CoeffSeq,
    pub p_counts: CoeffSeq,
    pub n_counts: CoeffSeq,
    pub first_mismatch: Option<usize>,
}

impl VerifyReport {
    pub fn difference(&self) -> Vec<BigInt> {
        let p = self.p_counts.to_bigints().expect("counts are integers");
        let n = self.n_counts.to_bigints().expect("counts are integers");
        p.into_iter().zip(n).map(|(a, b)| a - b).collect()
    }
}

/// Solves the equation, compiles it, enumerates both grammars word by word
/// up to `max_n`, and compares derivation counts.
pub fn verify_ode_grammar(ode: &Ode, max_n: usize) -> Result<VerifyReport, OdeError> {
    let expected = ode_series(ode, max_n)?;
    let grammars = ode_to_grammar(ode)?;
    let count = |g: &Grammar| -> Result<CoeffSeq, OdeError> {
        Ok(enumerate(g, max_n)?.counts(CountView::Multiplicity))
    };
    let p_counts = count(&grammars.p)?;
    let n_counts = count(&grammars.n)?;
    let first_mismatch = (0..=max_n).find(|&k| {
        let diff = &p_counts.coeffs()[k] - &n_counts.coeffs()[k];
        diff != expected.coeffs()[k]
    });
    Ok(VerifyReport {
        pass: first_mismatch.is_none(),
        expected,
        p_counts,
        n_counts,
        first_mismatch,
    })
}

/// [`verify_ode_grammar`] over many equations on all available cores.
/// Results are in input order.
pub fn verify_many(cases: &[(Ode, usize)]) -> Vec<Result<VerifyReport, OdeError>> {
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(cases.len().max(1));
    let mut out: Vec<Option<Result<VerifyReport, OdeError>>> = vec![None; cases.len()];
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..cases.len())
                        .step_by(workers)
                        .map(|k| (k, verify_ode_grammar(&cases[k].0, cases[k].1)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("verification worker panicked") {
                out[k] = Some(r);
            }
        }
    });
    out.into_iter()
        .map(|r| r.expect("every case verified"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{check_class, GrammarClass};

    fn ode(text: &str) -> Ode {
        Ode::parse(text).unwrap()
    }

    #[test]
    fn split_nonnegative() {
        let sys = split_ode(&ode("T = 1 + z*T + z^2*T'"));
        assert_eq!(sys.to_string(), "P = 1 + z*P + z^2*P'\nN = z*N + z^2*N'\n");
        assert!(sys.n_rules.iter().all(|t| t.kind != TermKind::Source));
        assert_eq!(recombine(&sys), ode("T = 1 + z*T + z^2*T'"));
    }

    #[test]
    fn split_alternating() {
        let sys = split_ode(&ode("T = 1 - z*T"));
        assert_eq!(sys.to_string(), "P = 1 + z*N\nN = z*P\n");
        assert_eq!(recombine(&sys), ode("T = 1 - z*T"));
        let sys = split_ode(&ode("T = -2 + z^2 - 2*z^2*T'"));
        assert_eq!(sys.to_string(), "P = z^2 + 2*z^2*N'\nN = 2 + 2*z^2*P'\n");
    }

    #[test]
    fn factorial_grammar() {
        let g = ode_to_grammar(&ode("T = 1 + z*T + z^2*T'")).unwrap();
        assert_eq!(
            g.p.to_string(),
            "P -> _ | \"[x1_0]\" P | \"[x2_0] [x2_1]\" point(P)\n"
        );
        assert!(g.n.is_empty());
        assert_eq!(check_class(&g.p), GrammarClass::Pointing);
        assert_eq!(
            ode_to_grammar(&ode("T = 1 + z*T")).unwrap().p.to_string(),
            "P -> _ | \"[x1_0]\" P\n"
        );
    }

    #[test]
    fn alternating_grammar() {
        let g = ode_to_grammar(&ode("T = 1 - z*T")).unwrap();
        assert_eq!(
            g.p.to_string(),
            "P -> _ | \"[x1_0]\" N\nN -> \"[x2_0]\" P\n"
        );
        assert_eq!(g.n.start(), "N");
        let p = enumerate(&g.p, 5)
            .unwrap()
            .counts(CountView::Set)
            .to_integers()
            .unwrap();
        let n = enumerate(&g.n, 5)
            .unwrap()
            .counts(CountView::Set)
            .to_integers()
            .unwrap();
        assert_eq!(p, vec![1, 0, 1, 0, 1, 0]);
        assert_eq!(n, vec![0, 1, 0, 1, 0, 1]);
    }

    #[test]
    fn coefficients_become_copies() {
        let g = ode_to_grammar(&ode("T = 2 + 3*z*T")).unwrap();
        assert_eq!(g.p.rules().len(), 5);
        assert_eq!(
            g.p.rules()
                .iter()
                .filter(|r| r.rhs.items.is_empty())
                .count(),
            2
        );
    }

    #[test]
    fn verification() {
        let r = verify_ode_grammar(&ode("T = 1 + z*T + z^2*T'"), 8).unwrap();
        assert!(r.pass);
        assert_eq!(
            r.p_counts.to_integers().unwrap(),
            vec![1, 1, 2, 6, 24, 120, 720, 5040, 40320]
        );
        assert_eq!(r.n_counts.to_integers().unwrap(), vec![0; 9]);

        let r = verify_ode_grammar(&ode("T = 1 - z*T"), 8).unwrap();
        assert!(r.pass);
        assert_eq!(
            r.difference(),
            (0..9)
                .map(|n| BigInt::from((-1i64).pow(n)))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            ode_to_grammar(&ode("T = 1 - T")),
            Err(OdeError::Unguarded { .. })
        ));
        assert!(matches!(
            ode_to_grammar(&ode("T = 1 + z*T'")),
            Err(OdeError::Unguarded { .. })
        ));
        assert!(matches!(
            ode_to_grammar(&ode("T = 1 + z^2*T''")),
            Err(OdeError::Unguarded { .. })
        ));
        assert!(matches!(
            verify_ode_grammar(&ode("T = 1 + T"), 4),
            Err(OdeError::Inconsistent { index: 0 })
        ));
        assert!(matches!(
            ode_to_grammar(&ode("T = 1 + 5000*z*T")),
            Err(OdeError::TooManyCopies { .. })
        ));
    }

    #[test]
    fn parallel_verification_keeps_order() {
        let cases: Vec<(Ode, usize)> =
            ["T = 1 + z*T", "T = 1 - T", "T = 1 - z*T", "T = 1 + z^2*T'"]
                .iter()
                .map(|t| (ode(t), 5))
                .collect();
        let out = verify_many(&cases);
        assert!(out[0].as_ref().unwrap().pass);
        assert!(out[1].is_err());
        assert!(out[2].as_ref().unwrap().pass);
        assert!(out[3].as_ref().unwrap().pass);
    }
}
