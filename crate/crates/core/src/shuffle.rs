//! Shuffle products, both pointing operators and the shuffle closure.

use thiserror::Error;

use crate::word::{bar_word, LanguageSlice, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ShuffleError {
    #[error("shuffle closure of a language containing the empty word has infinitely many words of length 0")]
    EmptyWordInClosure,
}

/// How the right operand of a slice shuffle is barred.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Barring {
    /// Bar only when the base alphabets intersect, far enough to make the
    /// letter sets disjoint.
    Auto,
    /// Never bar.
    Off,
    /// Always add this many bars.
    Depth(u32),
}

fn interleave(
    a: &[Letter],
    b: &[Letter],
    prefix: &mut Vec<Letter>,
    emit: &mut impl FnMut(&[Letter]),
) {
    match (a.split_first(), b.split_first()) {
        (None, _) => {
            let mark = prefix.len();
            prefix.extend_from_slice(b);
            emit(prefix);
            prefix.truncate(mark);
        }
        (_, None) => {
            let mark = prefix.len();
            prefix.extend_from_slice(a);
            emit(prefix);
            prefix.truncate(mark);
        }
        (Some((u, rest_a)), Some((v, rest_b))) => {
            prefix.push(*u);
            interleave(rest_a, b, prefix, emit);
            prefix.pop();
            prefix.push(*v);
            interleave(a, rest_b, prefix, emit);
            prefix.pop();
        }
    }
}

/// Calls `emit` once per interleaving of `w1` and `w2`, in the order of the
/// recursion `uw₁ ⧢ vw₂ = u(w₁ ⧢ vw₂) + v(uw₁ ⧢ w₂)`.
pub fn for_each_interleaving(w1: &Word, w2: &Word, mut emit: impl FnMut(&[Letter])) {
    let mut prefix = Vec::with_capacity(w1.letter_count() + w2.letter_count());
    interleave(w1.letters(), w2.letters(), &mut prefix, &mut emit);
}

/// All interleavings of `w1` and `w2` as a multiset (duplicates kept).
///
/// With `auto_bar`, `w2` is barred once first so the union is disjoint.
pub fn shuffle_words(w1: &Word, w2: &Word, auto_bar: bool) -> Vec<Word> {
    let right = if auto_bar {
        bar_word(w2, 1)
    } else {
        w2.clone()
    };
    let mut out = Vec::new();
    for_each_interleaving(w1, &right, |letters| {
        out.push(Word::from_letters(letters.to_vec()))
    });
    out
}

fn auto_depth(l1: &LanguageSlice, l2: &LanguageSlice) -> u32 {
    let a1 = l1.alphabet();
    if l2.alphabet().is_disjoint(&a1) {
        0
    } else {
        l1.max_bar_depth().map_or(0, |d| d + 1)
    }
}

/// `L1 ⧢ L2` truncated to `max_len`, barring `L2` when the alphabets meet.
pub fn shuffle_slices(l1: &LanguageSlice, l2: &LanguageSlice, max_len: usize) -> LanguageSlice {
    shuffle_slices_with(l1, l2, max_len, Barring::Auto)
}

pub fn shuffle_slices_with(
    l1: &LanguageSlice,
    l2: &LanguageSlice,
    max_len: usize,
    barring: Barring,
) -> LanguageSlice {
    let depth = match barring {
        Barring::Auto => auto_depth(l1, l2),
        Barring::Off => 0,
        Barring::Depth(d) => d,
    };
    let right = if depth > 0 {
        l2.barred(depth)
    } else {
        l2.clone()
    };
    let mut out = LanguageSlice::new(max_len);
    for (n1, b1) in l1.buckets() {
        if n1 > max_len {
            break;
        }
        for (n2, b2) in right.buckets() {
            if n1 + n2 > max_len {
                break;
            }
            for (w1, &m1) in b1 {
                for (w2, &m2) in b2 {
                    let m = m1
                        .checked_mul(m2)
                        .expect("word multiplicity overflowed u64");
                    for_each_interleaving(w1, w2, |letters| {
                        out.insert(Word::from_letters(letters.to_vec()), m);
                    });
                }
            }
        }
    }
    out
}

/// Classic pointing: every word of length `n` yields `n` words, each with one
/// unmarked position barred once more.
pub fn point_classic(l: &LanguageSlice) -> LanguageSlice {
    let mut out = LanguageSlice::new(l.max_len());
    for (w, m) in l.iter() {
        for (i, letter) in w.letters().iter().enumerate() {
            if letter.is_marked() {
                continue;
            }
            let mut letters = w.letters().to_vec();
            letters[i] = letter.barred(1);
            out.insert(Word::from_letters(letters), m);
        }
    }
    out
}

/// Terminal pointing of a single word: one result per unmarked letter, that
/// letter receiving `marked_count + 1` primes.
pub fn point_terminal_word(w: &Word) -> Vec<Word> {
    let primes = w.marked_count() as u32 + 1;
    w.letters()
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.is_marked())
        .map(|(i, l)| {
            let mut letters = w.letters().to_vec();
            letters[i] = l.with_primes(primes);
            Word::from_letters(letters)
        })
        .collect()
}

/// Terminal pointing of a slice. Results are one shorter than their source,
/// so the output is complete up to `max_len - 1`.
pub fn point_terminal(l: &LanguageSlice) -> LanguageSlice {
    let mut out = LanguageSlice::new(l.max_len().saturating_sub(1));
    for (w, m) in l.iter() {
        for p in point_terminal_word(w) {
            out.insert(p, m);
        }
    }
    out
}

/// `⋃_{k≥1} L^{⧢k}` truncated to `max_len`. The `k`-th copy of `L` is barred
/// past every copy before it.
pub fn shuffle_closure_slice(
    l: &LanguageSlice,
    max_len: usize,
) -> Result<LanguageSlice, ShuffleError> {
    if l.contains_empty_word() {
        return Err(ShuffleError::EmptyWordInClosure);
    }
    let base = l.truncate(max_len);
    let Some(min_len) = base.min_word_length() else {
        return Ok(LanguageSlice::new(max_len));
    };
    let step = base.max_bar_depth().map_or(1, |d| d + 1);
    let copies = max_len / min_len;
    let mut stage = base.clone();
    let mut out = base.clone();
    for k in 2..=copies {
        stage = shuffle_slices_with(
            &stage,
            &base,
            max_len,
            Barring::Depth((k as u32 - 1) * step),
        );
        out.merge(&stage);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::CountView;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn words(list: &[&str]) -> Vec<Word> {
        list.iter().map(|s| w(s)).collect()
    }

    fn slice(list: &[&str], max_len: usize) -> LanguageSlice {
        LanguageSlice::from_words(words(list), max_len)
    }

    fn counts(l: &LanguageSlice, view: CountView) -> Vec<i64> {
        l.counts(view).to_integers().unwrap()
    }

    fn sorted(mut v: Vec<Word>) -> Vec<Word> {
        v.sort();
        v
    }

    #[test]
    fn shuffle_of_two_letters() {
        assert_eq!(
            sorted(shuffle_words(&w("a"), &w("a"), true)),
            words(&["~a a", "a ~a"])
        );
        assert_eq!(
            shuffle_words(&w("a"), &w("a"), false),
            words(&["a a", "a a"])
        );
    }

    #[test]
    fn shuffle_with_empty_word() {
        let x = w("abc");
        assert_eq!(shuffle_words(&Word::empty(), &x, false), vec![x.clone()]);
        assert_eq!(shuffle_words(&x, &Word::empty(), true), vec![x]);
    }

    #[test]
    fn shuffle_inserts_into_every_gap() {
        assert_eq!(
            sorted(shuffle_words(&w("ab"), &w("c"), true)),
            sorted(words(&["~c a b", "a ~c b", "a b ~c"]))
        );
    }

    #[test]
    fn slice_shuffle_examples() {
        let out = shuffle_slices(&slice(&["a"], 1), &slice(&["b"], 1), 2);
        assert_eq!(
            out.bucket(2).keys().cloned().collect::<Vec<_>>(),
            words(&["a b", "b a"])
        );

        let empty = LanguageSlice::new(3);
        assert!(shuffle_slices(&empty, &slice(&["ab", "_"], 2), 3).is_empty());

        let out = shuffle_slices(&slice(&["ud"], 2), &slice(&["lr"], 2), 4);
        assert_eq!(out.bucket(4).len(), 6);
    }

    #[test]
    fn auto_bar_only_on_shared_alphabet() {
        let out = shuffle_slices(&slice(&["a"], 1), &slice(&["b"], 1), 2);
        assert!(out.iter().all(|(w, _)| w.max_bar_depth() == Some(0)));
        let out = shuffle_slices(&slice(&["a", "~a"], 1), &slice(&["a"], 1), 2);
        // Shifted past the deepest bar already present on the left.
        assert!(out.contains(&w("a ~~a")));
        assert_eq!(counts(&out, CountView::Set), vec![0, 0, 4]);
    }

    #[test]
    fn classic_pointing() {
        let out = point_classic(&slice(&["abc"], 3));
        assert_eq!(
            out.bucket(3).keys().cloned().collect::<Vec<_>>(),
            sorted(words(&["~a b c", "a ~b c", "a b ~c"]))
        );
        assert!(point_classic(&slice(&["_"], 0)).is_empty());
        let line = slice(&["_", "a", "aa", "aaa"], 3);
        assert_eq!(
            counts(&point_classic(&line), CountView::Multiplicity),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn terminal_pointing() {
        assert_eq!(
            sorted(point_terminal_word(&w("aab"))),
            sorted(words(&["a' a b", "a a' b", "a a b'"]))
        );
        assert!(point_terminal_word(&w("a'''a'b''")).is_empty());

        let twice: Vec<Word> = point_terminal_word(&w("aab"))
            .iter()
            .flat_map(point_terminal_word)
            .collect();
        assert_eq!(twice.len(), 6);
        for p in &twice {
            let mut primes: Vec<u32> = p
                .letters()
                .iter()
                .map(|l| l.primes)
                .filter(|&p| p > 0)
                .collect();
            primes.sort();
            assert_eq!(primes, vec![1, 2]);
        }
        assert_eq!(
            sorted(twice),
            sorted(words(&[
                "a'a''b", "a'ab''", "a''a'b", "aa'b''", "a''ab'", "aa''b'"
            ]))
        );
    }

    #[test]
    fn terminal_pointing_exhausts_a_word() {
        let mut current = vec![w("abca")];
        for _ in 0..4 {
            current = current.iter().flat_map(point_terminal_word).collect();
        }
        assert_eq!(current.len(), 24);
        assert!(current
            .iter()
            .flat_map(point_terminal_word)
            .next()
            .is_none());
    }

    #[test]
    fn closure_of_single_letter() {
        let out = shuffle_closure_slice(&slice(&["a"], 1), 3).unwrap();
        assert_eq!(counts(&out, CountView::Set), vec![0, 1, 2, 6]);
        assert_eq!(counts(&out, CountView::Multiplicity), vec![0, 1, 2, 6]);
        assert_eq!(
            out.bucket(2).keys().cloned().collect::<Vec<_>>(),
            words(&["~a a", "a ~a"])
        );
        assert!(out.contains(&w("~~a ~a a")));
    }

    #[test]
    fn closure_of_words() {
        let out = shuffle_closure_slice(&slice(&["ab"], 2), 4).unwrap();
        assert_eq!(counts(&out, CountView::Set), vec![0, 0, 1, 0, 6]);
        let out = shuffle_closure_slice(&slice(&["abc"], 3), 6).unwrap();
        assert_eq!(counts(&out, CountView::Set)[6], 20);
    }

    #[test]
    fn closure_rejects_empty_word() {
        assert_eq!(
            shuffle_closure_slice(&slice(&["_", "a"], 1), 3),
            Err(ShuffleError::EmptyWordInClosure)
        );
        assert!(shuffle_closure_slice(&LanguageSlice::new(2), 4)
            .unwrap()
            .is_empty());
    }
}
