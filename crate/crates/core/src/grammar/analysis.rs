//! Static analyses: minimum lengths, the length-lookahead graph used both
//! for properness and for sizing enumeration, shuffle dependencies, and rule
//! classes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::algo::is_cyclic_directed;
use petgraph::graph::DiGraph;

use super::{Alternative, Grammar, Item};

/// Lower bounds on word lengths per nonterminal; `None` for an empty
/// language.
pub(crate) type MinLengths = BTreeMap<String, Option<usize>>;

pub(crate) fn item_min(item: &Item, mins: &MinLengths) -> Option<usize> {
    match item {
        Item::Word(w) => Some(w.length()),
        Item::Nonterminal(n) => mins.get(n).copied().flatten(),
        Item::Shuffle(a, b) => Some(item_min(a, mins)? + item_min(b, mins)?),
        Item::Point(a) => item_min(a, mins).map(|m| m.saturating_sub(1)),
        // An empty word has no position to mark.
        Item::Mark(a) => item_min(a, mins).map(|m| m.max(1)),
        Item::Star(_) => Some(0),
        Item::ShuffleClosure(a) => item_min(a, mins),
    }
}

pub(crate) fn alt_min(alt: &Alternative, mins: &MinLengths) -> Option<usize> {
    alt.items.iter().map(|i| item_min(i, mins)).sum()
}

pub(crate) fn min_lengths(g: &Grammar) -> MinLengths {
    let mut mins: MinLengths = g.nonterminals().iter().map(|n| (n.clone(), None)).collect();
    loop {
        let mut changed = false;
        for rule in g.rules() {
            if let Some(m) = alt_min(&rule.rhs, &mins) {
                let slot = mins.get_mut(&rule.lhs).unwrap();
                if slot.is_none_or(|cur| m < cur) {
                    *slot = Some(m);
                    changed = true;
                }
            }
        }
        if !changed {
            return mins;
        }
    }
}

/// An edge `A -> X` with weight `w` means: enumerating `A` up to length `b`
/// needs `X` up to length `b + w`.
pub(crate) type Lookahead = BTreeMap<(String, String), i64>;

fn walk(lhs: &str, item: &Item, offset: i64, mins: &MinLengths, out: &mut Lookahead) {
    match item {
        Item::Word(_) => {}
        Item::Nonterminal(x) => {
            let slot = out.entry((lhs.to_string(), x.clone())).or_insert(i64::MIN);
            *slot = (*slot).max(offset);
        }
        Item::Shuffle(a, b) => {
            if let (Some(ma), Some(mb)) = (item_min(a, mins), item_min(b, mins)) {
                walk(lhs, a, offset - mb as i64, mins, out);
                walk(lhs, b, offset - ma as i64, mins, out);
            }
        }
        Item::Point(a) => walk(lhs, a, offset + 1, mins, out),
        Item::Mark(a) | Item::Star(a) | Item::ShuffleClosure(a) => walk(lhs, a, offset, mins, out),
    }
}

pub(crate) fn lookahead(g: &Grammar, mins: &MinLengths) -> Lookahead {
    let mut out = Lookahead::new();
    for rule in g.rules() {
        let item_mins: Option<Vec<usize>> =
            rule.rhs.items.iter().map(|i| item_min(i, mins)).collect();
        let Some(item_mins) = item_mins else { continue };
        let total: usize = item_mins.iter().sum();
        for (item, m) in rule.rhs.items.iter().zip(&item_mins) {
            walk(&rule.lhs, item, -((total - m) as i64), mins, &mut out);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IssueKind {
    /// A derivation can return to the same nonterminal without consuming any
    /// length, so some length has infinitely many derivations.
    NonShrinkingCycle,
    /// `sclose` of a language containing a length-0 word.
    NullableClosure,
    /// A shuffle operand can derive a length-0 word.
    NullableShuffleOperand,
    /// The nonterminal derives no word at all.
    EmptyLanguage,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub severity: Severity,
    pub kind: IssueKind,
    /// Offending nonterminals; for cycles, the chain in derivation order.
    pub chain: Vec<String>,
    pub line: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProperReport {
    pub proper: bool,
    pub issues: Vec<Issue>,
}

impl ProperReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Warning)
    }
}

impl fmt::Display for ProperReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let errors: Vec<&str> = self.errors().map(|i| i.message.as_str()).collect();
        if errors.is_empty() {
            f.write_str("proper")
        } else {
            f.write_str(&errors.join("; "))
        }
    }
}

fn cycle_chains(nodes: &[String], edges: &Lookahead) -> Vec<Vec<String>> {
    // Floyd-Warshall on negated weights: a cycle of weight >= 0 shows up as a
    // non-positive diagonal entry.
    let n = nodes.len();
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    const INF: i64 = i64::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    let mut next = vec![vec![usize::MAX; n]; n];
    for ((a, b), &w) in edges {
        let (i, j) = (index[a.as_str()], index[b.as_str()]);
        if -w < dist[i][j] {
            dist[i][j] = -w;
            next[i][j] = j;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if dist[i][k] >= INF {
                continue;
            }
            for j in 0..n {
                if dist[k][j] >= INF {
                    continue;
                }
                let via = (dist[i][k] + dist[k][j]).max(-INF);
                if via < dist[i][j] {
                    dist[i][j] = via;
                    next[i][j] = next[i][k];
                }
            }
        }
    }
    let mut covered = BTreeSet::new();
    let mut chains = Vec::new();
    for i in 0..n {
        if dist[i][i] > 0 || covered.contains(&i) {
            continue;
        }
        let mut chain = vec![i];
        let mut cur = next[i][i];
        while cur != i && cur != usize::MAX && chain.len() <= n && !chain.contains(&cur) {
            chain.push(cur);
            cur = next[cur][i];
        }
        covered.extend(chain.iter().copied());
        chains.push(chain.into_iter().map(|k| nodes[k].clone()).collect());
    }
    chains
}

fn scan_items(item: &Item, visit: &mut impl FnMut(&Item)) {
    visit(item);
    match item {
        Item::Word(_) | Item::Nonterminal(_) => {}
        Item::Shuffle(a, b) => {
            scan_items(a, visit);
            scan_items(b, visit);
        }
        Item::Point(a) | Item::Mark(a) | Item::Star(a) | Item::ShuffleClosure(a) => {
            scan_items(a, visit)
        }
    }
}

/// Diagnoses whether every length has finitely many derivations.
pub fn check_proper(g: &Grammar) -> ProperReport {
    let mins = min_lengths(g);
    let mut issues = Vec::new();

    for chain in cycle_chains(g.nonterminals(), &lookahead(g, &mins)) {
        let line = g
            .rules()
            .iter()
            .find(|r| r.lhs == chain[0])
            .and_then(|r| r.line);
        let mut shown = chain.clone();
        shown.push(chain[0].clone());
        issues.push(Issue {
            severity: Severity::Error,
            kind: IssueKind::NonShrinkingCycle,
            message: format!(
                "derivation cycle {} does not consume length (an empty word feeds a recursive rule, or pointing looks ahead)",
                shown.join(" -> ")
            ),
            chain,
            line,
        });
    }

    for rule in g.rules() {
        for item in &rule.rhs.items {
            scan_items(item, &mut |it| match it {
                Item::ShuffleClosure(a) if item_min(a, &mins) == Some(0) => issues.push(Issue {
                    severity: Severity::Error,
                    kind: IssueKind::NullableClosure,
                    chain: vec![rule.lhs.clone()],
                    line: rule.line,
                    message: format!(
                        "`{}` takes the shuffle closure of `{a}`, which derives the empty word",
                        rule.lhs
                    ),
                }),
                Item::Shuffle(a, b) => {
                    for operand in [a, b] {
                        if item_min(operand, &mins) == Some(0) {
                            issues.push(Issue {
                                severity: Severity::Warning,
                                kind: IssueKind::NullableShuffleOperand,
                                chain: vec![rule.lhs.clone()],
                                line: rule.line,
                                message: format!(
                                    "shuffle operand `{operand}` of `{}` derives the empty word",
                                    rule.lhs
                                ),
                            });
                        }
                    }
                }
                _ => {}
            });
        }
    }

    for (nt, m) in &mins {
        if m.is_none() {
            issues.push(Issue {
                severity: Severity::Warning,
                kind: IssueKind::EmptyLanguage,
                chain: vec![nt.clone()],
                line: g.rules().iter().find(|r| &r.lhs == nt).and_then(|r| r.line),
                message: format!("`{nt}` derives no words"),
            });
        }
    }

    ProperReport {
        proper: issues.iter().all(|i| i.severity != Severity::Error),
        issues,
    }
}

/// Nonterminals with an edge from each `A -> B ⧢ C` to `B` and `C`.
/// `sclose(B)` in a rule for `A` behaves like `A' -> A' ⧢ B | B` and so
/// contributes `A -> B` and the self-loop `A -> A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeSet<(String, String)>,
}

impl DependencyGraph {
    pub fn is_acyclic(&self) -> bool {
        let mut graph = DiGraph::<&str, ()>::new();
        let ids: BTreeMap<&str, _> = self
            .nodes
            .iter()
            .map(|n| (n.as_str(), graph.add_node(n)))
            .collect();
        for (a, b) in &self.edges {
            graph.add_edge(ids[a.as_str()], ids[b.as_str()], ());
        }
        !is_cyclic_directed(&graph)
    }
}

pub fn dependency_graph(g: &Grammar) -> DependencyGraph {
    let mut edges = BTreeSet::new();
    for rule in g.rules() {
        for item in &rule.rhs.items {
            scan_items(item, &mut |it| match it {
                Item::Shuffle(a, b) => {
                    let mut targets = BTreeSet::new();
                    a.nonterminals(&mut targets);
                    b.nonterminals(&mut targets);
                    edges.extend(targets.into_iter().map(|t| (rule.lhs.clone(), t)));
                }
                Item::ShuffleClosure(a) => {
                    let mut targets = BTreeSet::new();
                    a.nonterminals(&mut targets);
                    edges.extend(targets.into_iter().map(|t| (rule.lhs.clone(), t)));
                    edges.insert((rule.lhs.clone(), rule.lhs.clone()));
                }
                _ => {}
            });
        }
    }
    DependencyGraph {
        nodes: g.nonterminals().to_vec(),
        edges,
    }
}

/// Grammar classes by the rule forms they allow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GrammarClass {
    /// `A -> w`, `A -> w B`.
    RegularLike,
    /// `A -> w`, `A -> w B`, `A -> w point^k(B)`.
    Pointing,
    /// Concatenations of words and nonterminals.
    ContextFree,
    /// Context-free forms plus shuffle and classic pointing, with an acyclic
    /// shuffle dependency graph.
    AcyclicShuffle,
    /// Everything else, including shuffle closure.
    CyclicShuffle,
}

impl GrammarClass {
    pub const ALL: [GrammarClass; 5] = [
        GrammarClass::RegularLike,
        GrammarClass::Pointing,
        GrammarClass::ContextFree,
        GrammarClass::AcyclicShuffle,
        GrammarClass::CyclicShuffle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GrammarClass::RegularLike => "regular-like",
            GrammarClass::Pointing => "pointing",
            GrammarClass::ContextFree => "context-free",
            GrammarClass::AcyclicShuffle => "acyclic-shuffle",
            GrammarClass::CyclicShuffle => "cyclic-shuffle",
        }
    }

    /// Whether every rule of `g` has a form this class allows.
    pub fn admits(self, g: &Grammar) -> bool {
        let alts = || g.rules().iter().map(|r| &r.rhs);
        match self {
            GrammarClass::RegularLike => alts().all(|a| left_linear_tail(a, false)),
            GrammarClass::Pointing => alts().all(|a| left_linear_tail(a, true)),
            GrammarClass::ContextFree => alts().all(|a| {
                a.items
                    .iter()
                    .all(|i| matches!(i, Item::Word(_) | Item::Nonterminal(_)))
            }),
            GrammarClass::AcyclicShuffle => {
                alts().all(|a| a.items.iter().all(shuffle_form)) && dependency_graph(g).is_acyclic()
            }
            GrammarClass::CyclicShuffle => true,
        }
    }
}

impl fmt::Display for GrammarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Words, then at most one trailing nonterminal (optionally under terminal
/// pointing).
fn left_linear_tail(alt: &Alternative, allow_point: bool) -> bool {
    let Some((last, init)) = alt.items.split_last() else {
        return true;
    };
    if !init.iter().all(|i| matches!(i, Item::Word(_))) {
        return false;
    }
    let mut tail = last;
    if allow_point {
        while let Item::Point(inner) = tail {
            tail = inner;
        }
    }
    matches!(tail, Item::Word(_) | Item::Nonterminal(_))
        && (matches!(last, Item::Word(_) | Item::Nonterminal(_) | Item::Point(_)))
        && !(matches!(tail, Item::Word(_)) && !matches!(last, Item::Word(_)))
}

fn shuffle_form(item: &Item) -> bool {
    match item {
        Item::Word(_) | Item::Nonterminal(_) => true,
        Item::Shuffle(a, b) => shuffle_form(a) && shuffle_form(b),
        Item::Mark(a) => shuffle_form(a),
        Item::Point(_) | Item::Star(_) | Item::ShuffleClosure(_) => false,
    }
}

/// The most restrictive class whose rule forms `g` satisfies.
pub fn check_class(g: &Grammar) -> GrammarClass {
    GrammarClass::ALL
        .into_iter()
        .find(|c| c.admits(g))
        .unwrap_or(GrammarClass::CyclicShuffle)
}
