//! Bounded enumeration of grammar languages with derivation multiplicities.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::series::{CoeffSeq, Role};
use crate::shuffle::{
    point_classic, point_terminal, shuffle_closure_slice, shuffle_slices_with, Barring,
    ShuffleError,
};
use crate::word::{CountView, LanguageSlice, Word};

use super::analysis::{alt_min, check_proper, item_min, lookahead, min_lengths, MinLengths};
use super::{Alternative, Grammar, GrammarError, Item};

/// Longest length each nonterminal must be enumerated to so that the start
/// symbol is exact up to `max_len`.
fn needed_lengths(
    g: &Grammar,
    mins: &MinLengths,
    max_len: usize,
) -> Result<BTreeMap<String, usize>, GrammarError> {
    let edges = lookahead(g, mins);
    let mut need: BTreeMap<String, i64> = BTreeMap::new();
    need.insert(g.start().to_string(), max_len as i64);
    for _ in 0..=g.nonterminals().len() {
        let mut changed = false;
        for ((a, x), &w) in &edges {
            let Some(&base) = need.get(a) else { continue };
            let cand = base + w;
            if cand >= 0 && need.get(x).is_none_or(|&cur| cand > cur) {
                need.insert(x.clone(), cand);
                changed = true;
            }
        }
        if !changed {
            return Ok(need.into_iter().map(|(k, v)| (k, v as usize)).collect());
        }
    }
    Err(GrammarError::Improper(check_proper(g)))
}

/// What a nonterminal is evaluated to: explicit words, or only their
/// number per length.
trait Domain {
    type Lang: Clone + PartialEq;

    fn empty(&self, bound: usize) -> Self::Lang;
    fn word(&self, w: &Word, bound: usize) -> Self::Lang;
    fn max_len(&self, l: &Self::Lang) -> usize;
    fn truncate(&self, l: &Self::Lang, bound: usize) -> Self::Lang;
    fn is_empty(&self, l: &Self::Lang) -> bool;
    fn union(&self, acc: &mut Self::Lang, l: &Self::Lang);
    fn concat(&self, a: &Self::Lang, b: &Self::Lang, bound: usize) -> Self::Lang;
    fn shuffle(&self, a: &Self::Lang, b: &Self::Lang, bound: usize) -> Self::Lang;
    /// Terminal pointing of a language known up to `bound + 1`.
    fn point(&self, l: &Self::Lang, bound: usize) -> Self::Lang;
    fn mark(&self, l: &Self::Lang) -> Self::Lang;
    fn closure(&self, l: &Self::Lang, bound: usize) -> Result<Self::Lang, GrammarError>;
}

struct Words;

impl Domain for Words {
    type Lang = LanguageSlice;

    fn empty(&self, bound: usize) -> LanguageSlice {
        LanguageSlice::new(bound)
    }

    fn word(&self, w: &Word, bound: usize) -> LanguageSlice {
        LanguageSlice::from_words([w.clone()], bound)
    }

    fn max_len(&self, l: &LanguageSlice) -> usize {
        l.max_len()
    }

    fn truncate(&self, l: &LanguageSlice, bound: usize) -> LanguageSlice {
        l.truncate(bound)
    }

    fn is_empty(&self, l: &LanguageSlice) -> bool {
        l.is_empty()
    }

    fn union(&self, acc: &mut LanguageSlice, l: &LanguageSlice) {
        acc.merge(l);
    }

    fn concat(&self, a: &LanguageSlice, b: &LanguageSlice, bound: usize) -> LanguageSlice {
        let mut out = LanguageSlice::new(bound);
        for (n1, b1) in a.buckets() {
            for (n2, b2) in b.buckets() {
                if n1 + n2 > bound {
                    break;
                }
                for (w1, &m1) in b1 {
                    for (w2, &m2) in b2 {
                        let m = m1
                            .checked_mul(m2)
                            .expect("word multiplicity overflowed u64");
                        out.insert(w1.concat(w2), m);
                    }
                }
            }
        }
        out
    }

    fn shuffle(&self, a: &LanguageSlice, b: &LanguageSlice, bound: usize) -> LanguageSlice {
        shuffle_slices_with(a, b, bound, Barring::Depth(1))
    }

    fn point(&self, l: &LanguageSlice, bound: usize) -> LanguageSlice {
        point_terminal(l).truncate(bound)
    }

    fn mark(&self, l: &LanguageSlice) -> LanguageSlice {
        point_classic(l)
    }

    fn closure(&self, l: &LanguageSlice, bound: usize) -> Result<LanguageSlice, GrammarError> {
        Ok(shuffle_closure_slice(l, bound)?)
    }
}

/// Derivation counts per length. Shuffles interleave letters, so counting
/// them by length is exact only while no letter is primed.
struct Counts;

fn binomial_row(n: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for k in 1..=n {
        let next = &row[k - 1] * BigUint::from(n + 1 - k) / BigUint::from(k);
        row.push(next);
    }
    row
}

impl Domain for Counts {
    type Lang = Vec<BigUint>;

    fn empty(&self, bound: usize) -> Vec<BigUint> {
        vec![BigUint::zero(); bound + 1]
    }

    fn word(&self, w: &Word, bound: usize) -> Vec<BigUint> {
        let mut out = self.empty(bound);
        if w.length() <= bound {
            out[w.length()] = BigUint::one();
        }
        out
    }

    fn max_len(&self, l: &Vec<BigUint>) -> usize {
        l.len() - 1
    }

    fn truncate(&self, l: &Vec<BigUint>, bound: usize) -> Vec<BigUint> {
        let mut out = l.clone();
        out.resize(bound + 1, BigUint::zero());
        out
    }

    fn is_empty(&self, l: &Vec<BigUint>) -> bool {
        l.iter().all(Zero::is_zero)
    }

    fn union(&self, acc: &mut Vec<BigUint>, l: &Vec<BigUint>) {
        for (x, y) in acc.iter_mut().zip(l) {
            *x += y;
        }
    }

    fn concat(&self, a: &Vec<BigUint>, b: &Vec<BigUint>, bound: usize) -> Vec<BigUint> {
        let mut out = self.empty(bound);
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().take((bound + 1).saturating_sub(i)) {
                out[i + j] += x * y;
            }
        }
        out
    }

    fn shuffle(&self, a: &Vec<BigUint>, b: &Vec<BigUint>, bound: usize) -> Vec<BigUint> {
        let mut out = self.empty(bound);
        for (n, slot) in out.iter_mut().enumerate() {
            let binom = binomial_row(n);
            for i in 0..=n {
                if let (Some(x), Some(y)) = (a.get(i), b.get(n - i)) {
                    *slot += &binom[i] * x * y;
                }
            }
        }
        out
    }

    fn point(&self, l: &Vec<BigUint>, bound: usize) -> Vec<BigUint> {
        (0..=bound)
            .map(|n| {
                l.get(n + 1)
                    .map_or_else(BigUint::zero, |c| c * BigUint::from(n + 1))
            })
            .collect()
    }

    fn mark(&self, l: &Vec<BigUint>) -> Vec<BigUint> {
        l.iter()
            .enumerate()
            .map(|(n, c)| c * BigUint::from(n))
            .collect()
    }

    fn closure(&self, l: &Vec<BigUint>, bound: usize) -> Result<Vec<BigUint>, GrammarError> {
        if !l[0].is_zero() {
            return Err(ShuffleError::EmptyWordInClosure.into());
        }
        let base = self.truncate(l, bound);
        let Some(min_len) = base.iter().position(|c| !c.is_zero()) else {
            return Ok(base);
        };
        let mut stage = base.clone();
        let mut out = base.clone();
        for _ in 2..=bound / min_len {
            stage = self.shuffle(&stage, &base, bound);
            self.union(&mut out, &stage);
        }
        Ok(out)
    }
}

struct Evaluator<'g, D: Domain> {
    domain: D,
    mins: &'g MinLengths,
    env: BTreeMap<String, D::Lang>,
}

impl<D: Domain> Evaluator<'_, D> {
    fn item(&self, item: &Item, bound: usize) -> Result<D::Lang, GrammarError> {
        let d = &self.domain;
        Ok(match item {
            Item::Word(w) => d.word(w, bound),
            Item::Nonterminal(x) => match self.env.get(x) {
                Some(l) => {
                    debug_assert!(d.max_len(l) >= bound, "`{x}` enumerated too short");
                    d.truncate(l, bound)
                }
                None => d.empty(bound),
            },
            Item::Shuffle(a, b) => {
                let (Some(ma), Some(mb)) = (item_min(a, self.mins), item_min(b, self.mins)) else {
                    return Ok(d.empty(bound));
                };
                if ma + mb > bound {
                    return Ok(d.empty(bound));
                }
                let left = self.item(a, bound - mb)?;
                let right = self.item(b, bound - ma)?;
                d.shuffle(&left, &right, bound)
            }
            Item::Point(a) => d.point(&self.item(a, bound + 1)?, bound),
            Item::Mark(a) => d.mark(&self.item(a, bound)?),
            Item::ShuffleClosure(a) => d.closure(&self.item(a, bound)?, bound)?,
            Item::Star(_) => unreachable!("star is desugared when the grammar is built"),
        })
    }

    fn alternative(&self, alt: &Alternative, bound: usize) -> Result<D::Lang, GrammarError> {
        let d = &self.domain;
        let Some(total) = alt_min(alt, self.mins) else {
            return Ok(d.empty(bound));
        };
        if total > bound {
            return Ok(d.empty(bound));
        }
        let mut acc = d.word(&Word::empty(), bound);
        for item in &alt.items {
            let m = item_min(item, self.mins).unwrap();
            let part = self.item(item, bound - (total - m))?;
            acc = d.concat(&acc, &part, bound);
            if d.is_empty(&acc) {
                break;
            }
        }
        Ok(acc)
    }

    fn nonterminal(&self, g: &Grammar, x: &str, bound: usize) -> Result<D::Lang, GrammarError> {
        let mut out = self.domain.empty(bound);
        for alt in g.alternatives(x) {
            let l = self.alternative(alt, bound)?;
            self.domain.union(&mut out, &l);
        }
        Ok(out)
    }
}

fn evaluate<D: Domain>(g: &Grammar, max_len: usize, domain: D) -> Result<D::Lang, GrammarError> {
    let report = check_proper(g);
    if !report.proper {
        return Err(GrammarError::Improper(report));
    }
    let mins = min_lengths(g);
    let need = needed_lengths(g, &mins, max_len)?;

    let mut graph = DiGraph::<&str, ()>::new();
    let ids: BTreeMap<&str, _> = need
        .keys()
        .map(|n| (n.as_str(), graph.add_node(n.as_str())))
        .collect();
    let mut self_loops = BTreeSet::new();
    for rule in g.rules() {
        let Some(&from) = ids.get(rule.lhs.as_str()) else {
            continue;
        };
        let mut refs = BTreeSet::new();
        for item in &rule.rhs.items {
            item.nonterminals(&mut refs);
        }
        for r in refs {
            if let Some(&to) = ids.get(r.as_str()) {
                if r == rule.lhs {
                    self_loops.insert(r.clone());
                }
                graph.update_edge(from, to, ());
            }
        }
    }

    let max_need = need.values().copied().max().unwrap_or(0);
    let mut ev = Evaluator {
        domain,
        mins: &mins,
        env: BTreeMap::new(),
    };
    for scc in tarjan_scc(&graph) {
        let mut members: Vec<&str> = scc.iter().map(|&i| graph[i]).collect();
        members.sort_unstable();
        if members.len() == 1 && !self_loops.contains(members[0]) {
            let x = members[0];
            let l = ev.nonterminal(g, x, need[x])?;
            ev.env.insert(x.to_string(), l);
            continue;
        }
        for &x in &members {
            let empty = ev.domain.empty(need[x]);
            ev.env.insert(x.to_string(), empty);
        }
        let cap = 4 * members.len() * (max_need + 2) + 16;
        let mut rounds = 0;
        loop {
            rounds += 1;
            if rounds > cap {
                return Err(GrammarError::Diverged {
                    nonterminal: members[0].to_string(),
                    rounds: cap,
                });
            }
            let mut changed = false;
            for &x in &members {
                let l = ev.nonterminal(g, x, need[x])?;
                if ev.env[x] != l {
                    ev.env.insert(x.to_string(), l);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    Ok(match ev.env.remove(g.start()) {
        Some(l) => ev.domain.truncate(&l, max_len),
        None => ev.domain.empty(max_len),
    })
}

/// The language of the start symbol up to `max_len`, each word carrying its
/// number of derivations. Shuffle operands on the right are barred once so
/// that letters keep track of the operand they came from.
pub fn enumerate(g: &Grammar, max_len: usize) -> Result<LanguageSlice, GrammarError> {
    evaluate(g, max_len, Words)
}

/// Number of derivations per length up to `max_len`, without building
/// words. Agrees with the multiplicity counts of [`enumerate`].
pub fn count_derivations(g: &Grammar, max_len: usize) -> Result<CoeffSeq, GrammarError> {
    let uses = |pred: fn(&Item) -> bool| {
        g.rules()
            .iter()
            .any(|r| r.rhs.items.iter().any(|i| i.any(pred)))
    };
    if uses(|i| matches!(i, Item::Point(_)))
        && uses(|i| matches!(i, Item::Shuffle(..) | Item::ShuffleClosure(_)))
    {
        return Err(GrammarError::Unsupported(
            "derivation counts of shuffles with terminal pointing need explicit words",
        ));
    }
    let counts = evaluate(g, max_len, Counts)?;
    Ok(CoeffSeq::from_naturals(counts, Role::Ogf))
}

/// Compares derivation counts with distinct-word counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmbiguityReport {
    pub unambiguous: bool,
    pub first_ambiguous_length: Option<usize>,
    /// A shortest word with more than one derivation, and its count.
    pub witness: Option<(Word, u64)>,
    pub set_counts: CoeffSeq,
    pub multiplicity_counts: CoeffSeq,
}

pub fn ambiguity_probe(g: &Grammar, max_len: usize) -> Result<AmbiguityReport, GrammarError> {
    let slice = enumerate(g, max_len)?;
    let witness = slice
        .iter()
        .find(|(_, m)| *m > 1)
        .map(|(w, m)| (w.clone(), m));
    Ok(AmbiguityReport {
        unambiguous: witness.is_none(),
        first_ambiguous_length: witness.as_ref().map(|(w, _)| w.length()),
        witness,
        set_counts: slice.counts(CountView::Set),
        multiplicity_counts: slice.counts(CountView::Multiplicity),
    })
}
