//! Letters, words and length-bounded language slices.
//!
//! A [`Letter`] is a base symbol decorated with a bar depth (used to keep the
//! operands of a shuffle disjoint) and a prime count (the mark left by
//! terminal pointing). Marked letters do not contribute to the length of a
//! word.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::ParseError;
use crate::series::{CoeffSeq, Role};

/// Longest symbol name accepted inside `[...]`.
pub const MAX_SYMBOL_LEN: usize = 15;

/// A base alphabet symbol: a single character or a short bracketed name.
///
/// Stored inline so letters stay `Copy`; ordering is byte-lexicographic on
/// the name.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol {
    len: u8,
    bytes: [u8; MAX_SYMBOL_LEN],
}

impl Symbol {
    pub fn new(name: &str) -> Result<Self, ParseError> {
        if name.is_empty() || name.len() > MAX_SYMBOL_LEN {
            return Err(ParseError::new(format!(
                "symbol name `{name}` must have 1..={MAX_SYMBOL_LEN} bytes"
            )));
        }
        if !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(ParseError::new(format!(
                "symbol name `{name}` may only contain ASCII letters, digits and `_`"
            )));
        }
        let mut bytes = [0u8; MAX_SYMBOL_LEN];
        bytes[..name.len()].copy_from_slice(name.as_bytes());
        Ok(Symbol {
            len: name.len() as u8,
            bytes,
        })
    }

    pub fn as_str(&self) -> &str {
        // Only ASCII is ever stored.
        std::str::from_utf8(&self.bytes[..self.len as usize]).unwrap()
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 1 {
            f.write_str(self.as_str())
        } else {
            write!(f, "[{}]", self.as_str())
        }
    }
}

/// A symbol together with its bar depth and prime count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub symbol: Symbol,
    pub bar_depth: u32,
    pub primes: u32,
}

impl Letter {
    pub fn new(symbol: Symbol) -> Self {
        Letter {
            symbol,
            bar_depth: 0,
            primes: 0,
        }
    }

    /// Convenience constructor for tests and examples; panics on a bad name.
    pub fn plain(name: &str) -> Self {
        Letter::new(Symbol::new(name).expect("valid symbol name"))
    }

    pub fn barred(mut self, depth: u32) -> Self {
        self.bar_depth += depth;
        self
    }

    pub fn with_primes(mut self, primes: u32) -> Self {
        self.primes = primes;
        self
    }

    pub fn is_marked(&self) -> bool {
        self.primes > 0
    }
}

// Symbols ascend; within a symbol the more decorated copy sorts first, so
// `a ⧢ a` lists as `~a a, a ~a`.
impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.symbol
            .cmp(&other.symbol)
            .then_with(|| other.bar_depth.cmp(&self.bar_depth))
            .then_with(|| other.primes.cmp(&self.primes))
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.bar_depth {
            f.write_str("~")?;
        }
        write!(f, "{}", self.symbol)?;
        for _ in 0..self.primes {
            f.write_str("'")?;
        }
        Ok(())
    }
}

/// A finite sequence of letters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    /// Number of letters including marked ones.
    pub fn letter_count(&self) -> usize {
        self.letters.len()
    }

    /// Number of unmarked letters.
    pub fn length(&self) -> usize {
        self.letters.iter().filter(|l| !l.is_marked()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn marked_count(&self) -> usize {
        self.letters.iter().filter(|l| l.is_marked()).count()
    }

    pub fn max_bar_depth(&self) -> Option<u32> {
        self.letters.iter().map(|l| l.bar_depth).max()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.letters.len() + other.letters.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.letters.iter().map(|l| l.symbol)
    }
}

/// Unmarked length of `w`.
pub fn word_length(w: &Word) -> usize {
    w.length()
}

/// Adds `depth_increment` bars to every letter of `w`.
pub fn bar_word(w: &Word, depth_increment: u32) -> Word {
    Word {
        letters: w
            .letters
            .iter()
            .map(|l| l.barred(depth_increment))
            .collect(),
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("_");
        }
        for (i, letter) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{letter}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = ParseError;

    /// Parses `~a b'' [name]`-style text; whitespace between letters is
    /// optional and `_` (or the empty string) is the empty word.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        if trimmed.is_empty() || trimmed == "_" {
            return Ok(Word::empty());
        }
        let bytes = trimmed.as_bytes();
        let mut letters = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i].is_ascii_whitespace() {
                i += 1;
                continue;
            }
            let mut bars = 0;
            while i < bytes.len() && bytes[i] == b'~' {
                bars += 1;
                i += 1;
            }
            let symbol = match bytes.get(i) {
                Some(b'[') => {
                    let close = trimmed[i..].find(']').ok_or_else(|| {
                        ParseError::new(format!("unclosed `[` in word `{trimmed}`"))
                    })?;
                    let sym = Symbol::new(&trimmed[i + 1..i + close])?;
                    i += close + 1;
                    sym
                }
                Some(b) if b.is_ascii_alphanumeric() => {
                    let sym = Symbol::new(&trimmed[i..i + 1])?;
                    i += 1;
                    sym
                }
                Some(_) => {
                    return Err(ParseError::new(format!(
                        "unexpected character `{}` in word `{trimmed}`",
                        trimmed[i..].chars().next().unwrap()
                    )))
                }
                None => {
                    return Err(ParseError::new(format!(
                        "dangling `~` at end of word `{trimmed}`"
                    )))
                }
            };
            let mut primes = 0;
            while i < bytes.len() && bytes[i] == b'\'' {
                primes += 1;
                i += 1;
            }
            letters.push(Letter {
                symbol,
                bar_depth: bars,
                primes,
            });
        }
        Ok(Word { letters })
    }
}

/// How a slice is counted: each distinct word once, or with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountView {
    Set,
    Multiplicity,
}

/// All words of a language up to `max_len`, bucketed by length, with
/// multiplicities (derivation counts).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageSlice {
    max_len: usize,
    buckets: Vec<BTreeMap<Word, u64>>,
}

impl LanguageSlice {
    pub fn new(max_len: usize) -> Self {
        LanguageSlice {
            max_len,
            buckets: vec![BTreeMap::new(); max_len + 1],
        }
    }

    pub fn from_words<I>(words: I, max_len: usize) -> Self
    where
        I: IntoIterator<Item = Word>,
    {
        let mut slice = LanguageSlice::new(max_len);
        for w in words {
            slice.insert(w, 1);
        }
        slice
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Adds `multiplicity` copies of `word`. Words longer than `max_len` are
    /// dropped; returns whether the word was kept.
    pub fn insert(&mut self, word: Word, multiplicity: u64) -> bool {
        if multiplicity == 0 {
            return false;
        }
        let n = word.length();
        if n > self.max_len {
            return false;
        }
        let slot = self.buckets[n].entry(word).or_insert(0);
        *slot = slot
            .checked_add(multiplicity)
            .expect("word multiplicity overflowed u64");
        true
    }

    pub fn bucket(&self, n: usize) -> &BTreeMap<Word, u64> {
        &self.buckets[n]
    }

    pub fn buckets(&self) -> impl Iterator<Item = (usize, &BTreeMap<Word, u64>)> {
        self.buckets.iter().enumerate()
    }

    /// Every stored word with its multiplicity, shortest first.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, u64)> {
        self.buckets
            .iter()
            .flat_map(|b| b.iter().map(|(w, &m)| (w, m)))
    }

    pub fn contains(&self, word: &Word) -> bool {
        let n = word.length();
        n <= self.max_len && self.buckets[n].contains_key(word)
    }

    pub fn multiplicity(&self, word: &Word) -> u64 {
        let n = word.length();
        if n > self.max_len {
            return 0;
        }
        self.buckets[n].get(word).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.iter().all(|b| b.is_empty())
    }

    pub fn distinct_words(&self) -> usize {
        self.buckets.iter().map(|b| b.len()).sum()
    }

    /// Collapses every multiplicity to 1.
    pub fn set_view(&self) -> LanguageSlice {
        LanguageSlice {
            max_len: self.max_len,
            buckets: self
                .buckets
                .iter()
                .map(|b| b.keys().map(|w| (w.clone(), 1)).collect())
                .collect(),
        }
    }

    /// Restricts to words of length at most `max_len`.
    pub fn truncate(&self, max_len: usize) -> LanguageSlice {
        let keep = max_len.min(self.max_len);
        let mut buckets: Vec<_> = self.buckets[..=keep].to_vec();
        buckets.resize(max_len + 1, BTreeMap::new());
        LanguageSlice { max_len, buckets }
    }

    /// Multiset union.
    pub fn merge(&mut self, other: &LanguageSlice) {
        for (w, m) in other.iter() {
            self.insert(w.clone(), m);
        }
    }

    pub fn map_words<F>(&self, mut f: F) -> LanguageSlice
    where
        F: FnMut(&Word) -> Word,
    {
        let mut out = LanguageSlice::new(self.max_len);
        for (w, m) in self.iter() {
            out.insert(f(w), m);
        }
        out
    }

    /// Adds `depth_increment` bars to every word.
    pub fn barred(&self, depth_increment: u32) -> LanguageSlice {
        self.map_words(|w| bar_word(w, depth_increment))
    }

    /// Base symbols occurring in the slice.
    pub fn alphabet(&self) -> BTreeSet<Symbol> {
        self.iter().flat_map(|(w, _)| w.symbols()).collect()
    }

    pub fn max_bar_depth(&self) -> Option<u32> {
        self.iter().filter_map(|(w, _)| w.max_bar_depth()).max()
    }

    pub fn min_word_length(&self) -> Option<usize> {
        self.buckets.iter().position(|b| !b.is_empty())
    }

    pub fn contains_empty_word(&self) -> bool {
        !self.buckets[0].is_empty()
    }

    /// Per-length word counts as an ordinary generating function prefix.
    pub fn counts(&self, view: CountView) -> CoeffSeq {
        let coeffs = self
            .buckets
            .iter()
            .map(|b| match view {
                CountView::Set => BigUint::from(b.len()),
                CountView::Multiplicity => b.values().map(|&m| BigUint::from(m)).sum(),
            })
            .collect::<Vec<_>>();
        CoeffSeq::from_naturals(coeffs, Role::Ogf)
    }
}

/// `(ℓ(0), …, ℓ(max_len))` for the slice under the requested view.
pub fn slice_counts(slice: &LanguageSlice, view: CountView) -> CoeffSeq {
    slice.counts(view)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn lengths() {
        assert_eq!(word_length(&Word::empty()), 0);
        assert_eq!(word_length(&w("aab")), 3);
        assert_eq!(word_length(&w("a'''a'b''")), 0);
        assert_eq!(w("a'''a'b''").letter_count(), 3);
    }

    #[test]
    fn bars_compose() {
        let a = w("a");
        assert_eq!(bar_word(&a, 1), w("~a"));
        assert_eq!(bar_word(&Word::empty(), 1), Word::empty());
        let twice = bar_word(&bar_word(&a, 1), 1);
        assert_eq!(twice.letters()[0].bar_depth, 2);
        assert_eq!(twice, w("~~a"));
    }

    #[test]
    fn text_round_trip() {
        for text in ["_", "a", "~a a", "a ~a", "[x1_0] b'' ~~c'", "u d u d"] {
            assert_eq!(w(text).to_string(), text);
        }
        assert_eq!(w("aab"), w("a a b"));
        assert_eq!(w(""), Word::empty());
    }

    #[test]
    fn bad_words() {
        assert!("a-b".parse::<Word>().is_err());
        assert!("[abc".parse::<Word>().is_err());
        assert!("a~".parse::<Word>().is_err());
        assert!("[]".parse::<Word>().is_err());
        assert!("[abcdefghijklmnop]".parse::<Word>().is_err());
    }

    #[test]
    fn letter_equality_uses_all_fields() {
        let a = Letter::plain("a");
        assert_ne!(a, a.barred(1));
        assert_ne!(a, a.with_primes(1));
        assert_eq!(a.barred(1).with_primes(2), a.with_primes(2).barred(1));
    }

    #[test]
    fn decorated_copies_sort_first() {
        let mut words = vec![w("a ~a"), w("~a a")];
        words.sort();
        assert_eq!(words, vec![w("~a a"), w("a ~a")]);
        assert!(w("a") < w("b"));
    }

    #[test]
    fn counts_set_and_multiplicity() {
        let slice = LanguageSlice::from_words([w("_"), w("a"), w("aa")], 2);
        assert_eq!(
            slice.counts(CountView::Set).to_integers().unwrap(),
            vec![1, 1, 1]
        );

        let mut multi = LanguageSlice::new(2);
        multi.insert(w("ab"), 1);
        multi.insert(w("ab"), 1);
        assert_eq!(
            multi.counts(CountView::Multiplicity).to_integers().unwrap(),
            vec![0, 0, 2]
        );
        assert_eq!(
            multi.counts(CountView::Set).to_integers().unwrap(),
            vec![0, 0, 1]
        );
    }

    #[test]
    fn marked_words_land_in_their_unmarked_bucket() {
        let mut slice = LanguageSlice::new(3);
        assert!(slice.insert(w("b c a'"), 1));
        assert_eq!(slice.bucket(2).len(), 1);
        assert!(!slice.insert(w("aaaa"), 1));
    }

    fn dyck_words(max_len: usize) -> Vec<Word> {
        // Brute force over {u,d}^n keeping balanced words.
        let mut out = Vec::new();
        for n in 0..=max_len {
            for mask in 0u32..(1 << n) {
                let mut height = 0i32;
                let mut ok = true;
                let mut text = String::new();
                for i in 0..n {
                    if mask >> i & 1 == 1 {
                        height += 1;
                        text.push('u');
                    } else {
                        height -= 1;
                        text.push('d');
                    }
                    if height < 0 {
                        ok = false;
                        break;
                    }
                }
                if ok && height == 0 {
                    out.push(w(&text));
                }
            }
        }
        out
    }

    #[test]
    fn dyck_slice_counts() {
        let slice = LanguageSlice::from_words(dyck_words(6), 6);
        assert_eq!(
            slice.counts(CountView::Set).to_integers().unwrap(),
            vec![1, 0, 1, 0, 2, 0, 5]
        );
    }

    #[test]
    fn barring_preserves_counts() {
        let slice = LanguageSlice::from_words(dyck_words(8), 8);
        let barred = slice.barred(2);
        assert_eq!(barred.distinct_words(), slice.distinct_words());
        assert_eq!(barred.counts(CountView::Set), slice.counts(CountView::Set));
    }
}
