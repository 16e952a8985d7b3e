//! Grammars over words with concatenation, union, star, shuffle, both
//! pointing operators and shuffle closure.
//!
//! Text form, one rule per line:
//!
//! ```text
//! # Dyck words
//! @start D
//! D -> _ | "u" D "d" D
//! ```
//!
//! Alternatives concatenate `"word"` literals, `_` (the empty word),
//! nonterminal names and the operators `shuffle(X, Y)`, `point(X)` (terminal
//! pointing), `mark(X)` (classic pointing), `star(X)` and `sclose(X)`
//! (shuffle closure).

mod analysis;
mod enumerate;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::error::ParseError;
use crate::shuffle::ShuffleError;
use crate::word::Word;

pub use analysis::{
    check_class, check_proper, dependency_graph, DependencyGraph, GrammarClass, Issue, IssueKind,
    ProperReport, Severity,
};
pub use enumerate::{ambiguity_probe, count_derivations, enumerate, AmbiguityReport};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GrammarError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{}nonterminal `{name}` is used but has no rules", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    UnknownNonterminal { name: String, line: Option<usize> },
    #[error("grammar has no rules")]
    EmptyRuleSet,
    #[error("start symbol `{0}` has no rules")]
    UnknownStart(String),
    #[error("grammar is not proper: {0}")]
    Improper(ProperReport),
    #[error("enumeration of `{nonterminal}` did not stabilize after {rounds} rounds")]
    Diverged { nonterminal: String, rounds: usize },
    #[error(transparent)]
    Closure(#[from] ShuffleError),
    #[error("{0}")]
    Unsupported(&'static str),
}

/// One factor of an alternative.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    /// A terminal word; the empty word is `_`.
    Word(Word),
    Nonterminal(String),
    Shuffle(Box<Item>, Box<Item>),
    /// Terminal pointing.
    Point(Box<Item>),
    /// Classic pointing.
    Mark(Box<Item>),
    /// Kleene star; removed by [`Grammar::new`].
    Star(Box<Item>),
    ShuffleClosure(Box<Item>),
}

impl Item {
    pub fn nt(name: &str) -> Item {
        Item::Nonterminal(name.to_string())
    }

    pub fn word(text: &str) -> Item {
        Item::Word(text.parse().expect("valid word literal"))
    }

    pub fn shuffle(a: Item, b: Item) -> Item {
        Item::Shuffle(Box::new(a), Box::new(b))
    }

    pub fn point(a: Item) -> Item {
        Item::Point(Box::new(a))
    }

    pub fn mark(a: Item) -> Item {
        Item::Mark(Box::new(a))
    }

    pub fn star(a: Item) -> Item {
        Item::Star(Box::new(a))
    }

    pub fn sclose(a: Item) -> Item {
        Item::ShuffleClosure(Box::new(a))
    }

    /// `point(point(…(item)…))` with `k` applications.
    pub fn point_n(item: Item, k: usize) -> Item {
        (0..k).fold(item, |acc, _| Item::point(acc))
    }

    /// Nonterminals mentioned anywhere inside this item.
    /// Whether this item or any item nested in it satisfies `pred`.
    pub fn any(&self, pred: fn(&Item) -> bool) -> bool {
        pred(self)
            || match self {
                Item::Word(_) | Item::Nonterminal(_) => false,
                Item::Shuffle(a, b) => a.any(pred) || b.any(pred),
                Item::Point(a) | Item::Mark(a) | Item::Star(a) | Item::ShuffleClosure(a) => {
                    a.any(pred)
                }
            }
    }

    pub fn nonterminals(&self, out: &mut BTreeSet<String>) {
        match self {
            Item::Word(_) => {}
            Item::Nonterminal(n) => {
                out.insert(n.clone());
            }
            Item::Shuffle(a, b) => {
                a.nonterminals(out);
                b.nonterminals(out);
            }
            Item::Point(a) | Item::Mark(a) | Item::Star(a) | Item::ShuffleClosure(a) => {
                a.nonterminals(out)
            }
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Word(w) if w.is_empty() => f.write_str("_"),
            Item::Word(w) => write!(f, "\"{w}\""),
            Item::Nonterminal(n) => f.write_str(n),
            Item::Shuffle(a, b) => write!(f, "shuffle({a}, {b})"),
            Item::Point(a) => write!(f, "point({a})"),
            Item::Mark(a) => write!(f, "mark({a})"),
            Item::Star(a) => write!(f, "star({a})"),
            Item::ShuffleClosure(a) => write!(f, "sclose({a})"),
        }
    }
}

/// A concatenation of items; no items means the empty word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Alternative {
    pub items: Vec<Item>,
}

impl Alternative {
    pub fn new(items: Vec<Item>) -> Self {
        Alternative { items }
    }

    pub fn epsilon() -> Self {
        Alternative::default()
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.items.is_empty() {
            return f.write_str("_");
        }
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: String,
    pub rhs: Alternative,
    /// Source line, when parsed from text.
    pub line: Option<usize>,
}

impl Rule {
    pub fn new(lhs: &str, items: Vec<Item>) -> Self {
        Rule {
            lhs: lhs.to_string(),
            rhs: Alternative::new(items),
            line: None,
        }
    }
}

/// A validated grammar: every referenced nonterminal has a rule and no
/// `star` items remain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    start: String,
    rules: Vec<Rule>,
    /// Nonterminals in order of first definition.
    order: Vec<String>,
}

impl Grammar {
    pub fn new(start: &str, rules: Vec<Rule>) -> Result<Grammar, GrammarError> {
        if rules.is_empty() {
            return Err(GrammarError::EmptyRuleSet);
        }
        let mut g = Grammar {
            start: start.to_string(),
            rules: Vec::new(),
            order: Vec::new(),
        };
        let mut fresh = Desugar::default();
        for rule in rules {
            let rhs = Alternative::new(
                rule.rhs
                    .items
                    .into_iter()
                    .map(|i| fresh.item(i, rule.line))
                    .collect(),
            );
            g.push(Rule {
                lhs: rule.lhs,
                rhs,
                line: rule.line,
            });
        }
        for rule in fresh.rules {
            g.push(rule);
        }
        g.validate()?;
        Ok(g)
    }

    /// A grammar whose start symbol has no rules and generates nothing.
    pub fn empty(start: &str) -> Grammar {
        Grammar {
            start: start.to_string(),
            rules: Vec::new(),
            order: Vec::new(),
        }
    }

    pub fn parse(text: &str) -> Result<Grammar, GrammarError> {
        parse::parse_grammar(text)
    }

    fn push(&mut self, rule: Rule) {
        if !self.order.contains(&rule.lhs) {
            self.order.push(rule.lhs.clone());
        }
        self.rules.push(rule);
    }

    fn validate(&self) -> Result<(), GrammarError> {
        if !self.order.contains(&self.start) {
            return Err(GrammarError::UnknownStart(self.start.clone()));
        }
        for rule in &self.rules {
            let mut used = BTreeSet::new();
            for item in &rule.rhs.items {
                item.nonterminals(&mut used);
            }
            if let Some(name) = used.into_iter().find(|n| !self.order.contains(n)) {
                return Err(GrammarError::UnknownNonterminal {
                    name,
                    line: rule.line,
                });
            }
        }
        Ok(())
    }

    pub fn start(&self) -> &str {
        &self.start
    }

    pub fn with_start(&self, start: &str) -> Result<Grammar, GrammarError> {
        let g = Grammar {
            start: start.to_string(),
            ..self.clone()
        };
        g.validate()?;
        Ok(g)
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.order
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn alternatives<'a>(&'a self, lhs: &'a str) -> impl Iterator<Item = &'a Alternative> + 'a {
        self.rules
            .iter()
            .filter(move |r| r.lhs == lhs)
            .map(|r| &r.rhs)
    }

    /// Rules grouped by left-hand side, in definition order.
    pub fn grouped(&self) -> Vec<(&str, Vec<&Alternative>)> {
        self.order
            .iter()
            .map(|nt| (nt.as_str(), self.alternatives(nt).collect()))
            .collect()
    }

    /// Nonterminals reachable from the start symbol.
    pub fn reachable(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![self.start.clone()];
        while let Some(nt) = stack.pop() {
            if !seen.insert(nt.clone()) {
                continue;
            }
            for alt in self.alternatives(&nt) {
                let mut used = BTreeSet::new();
                for item in &alt.items {
                    item.nonterminals(&mut used);
                }
                stack.extend(used.into_iter().filter(|n| !seen.contains(n)));
            }
        }
        seen
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.order.first() != Some(&self.start) {
            writeln!(f, "@start {}", self.start)?;
        }
        for (lhs, alts) in self.grouped() {
            write!(f, "{lhs} ->")?;
            for (i, alt) in alts.iter().enumerate() {
                if i > 0 {
                    f.write_str(" |")?;
                }
                write!(f, " {alt}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Replaces `star(X)` by a fresh nonterminal `S -> _ | X S`.
#[derive(Default)]
struct Desugar {
    names: BTreeMap<Item, String>,
    rules: Vec<Rule>,
}

impl Desugar {
    fn item(&mut self, item: Item, line: Option<usize>) -> Item {
        match item {
            Item::Word(_) | Item::Nonterminal(_) => item,
            Item::Shuffle(a, b) => Item::shuffle(self.item(*a, line), self.item(*b, line)),
            Item::Point(a) => Item::point(self.item(*a, line)),
            Item::Mark(a) => Item::mark(self.item(*a, line)),
            Item::ShuffleClosure(a) => Item::sclose(self.item(*a, line)),
            Item::Star(a) => {
                let inner = self.item(*a, line);
                if let Some(name) = self.names.get(&inner) {
                    return Item::Nonterminal(name.clone());
                }
                // `*` never appears in parsed identifiers.
                let name = match &inner {
                    Item::Nonterminal(n) => format!("{n}*"),
                    _ => format!("star{}*", self.names.len()),
                };
                self.names.insert(inner.clone(), name.clone());
                self.rules.push(Rule {
                    lhs: name.clone(),
                    rhs: Alternative::epsilon(),
                    line,
                });
                self.rules.push(Rule {
                    lhs: name.clone(),
                    rhs: Alternative::new(vec![inner, Item::Nonterminal(name.clone())]),
                    line,
                });
                Item::Nonterminal(name)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_becomes_fresh_nonterminal() {
        let g = Grammar::new(
            "A",
            vec![Rule::new("A", vec![Item::star(Item::word("ab"))])],
        )
        .unwrap();
        assert_eq!(g.nonterminals(), ["A", "star0*"]);
        assert_eq!(g.to_string(), "A -> star0*\nstar0* -> _ | \"a b\" star0*\n");
        assert!(!g.to_string().contains("star("));
        assert_eq!(
            Grammar::parse(&g.to_string()).unwrap().to_string(),
            g.to_string()
        );
    }

    #[test]
    fn validation() {
        assert_eq!(Grammar::new("A", vec![]), Err(GrammarError::EmptyRuleSet));
        assert!(matches!(
            Grammar::new("A", vec![Rule::new("A", vec![Item::nt("B")])]),
            Err(GrammarError::UnknownNonterminal { .. })
        ));
        assert!(matches!(
            Grammar::new("Z", vec![Rule::new("A", vec![])]),
            Err(GrammarError::UnknownStart(_))
        ));
    }

    #[test]
    fn reachability() {
        let g = Grammar::parse("A -> \"a\" B\nB -> _\nC -> A").unwrap();
        assert_eq!(g.reachable().into_iter().collect::<Vec<_>>(), ["A", "B"]);
    }
}
