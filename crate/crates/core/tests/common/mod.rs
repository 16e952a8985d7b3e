//! Brute-force oracles shared by the integration tests. None of them go
//! through the shuffle recursion or the generating-function code.

#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::One;
use shufflegf::{Letter, Word};

pub fn w(s: &str) -> Word {
    s.parse().unwrap()
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

pub fn catalan(n: usize) -> BigUint {
    binomial(2 * n, n) / BigUint::from(n + 1)
}

/// Every word of length `n` over `alphabet`.
pub fn all_words(alphabet: &[&str], n: usize) -> Vec<Word> {
    let mut out = vec![Vec::<Letter>::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |s| {
                    let mut next = prefix.clone();
                    next.push(Letter::plain(s));
                    next
                })
            })
            .collect();
    }
    out.into_iter().map(Word::from_letters).collect()
}

/// Interleavings of `w1` and `w2`, one per choice of the positions taken by
/// `w1`.
pub fn brute_shuffle(w1: &Word, w2: &Word) -> Vec<Word> {
    let (m, n) = (w1.letter_count(), w2.letter_count());
    let mut out = Vec::new();
    for mask in 0u64..(1 << (m + n)) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let (mut i, mut j) = (0, 0);
        let letters = (0..m + n)
            .map(|p| {
                if mask >> p & 1 == 1 {
                    i += 1;
                    w1.letters()[i - 1]
                } else {
                    j += 1;
                    w2.letters()[j - 1]
                }
            })
            .collect();
        out.push(Word::from_letters(letters));
    }
    out
}

fn walk_ok(word: &[u8], closed: bool) -> bool {
    let (mut x, mut y) = (0i32, 0i32);
    for &c in word {
        match c {
            b'u' => y += 1,
            b'd' => y -= 1,
            b'r' => x += 1,
            b'l' => x -= 1,
            _ => unreachable!(),
        }
        if x < 0 || y < 0 {
            return false;
        }
    }
    !closed || (x == 0 && y == 0)
}

/// Quarter-plane walks with steps u, d, l, r of length `n`, by filtering all
/// `4^n` step sequences.
pub fn brute_walks(n: usize, closed: bool) -> u64 {
    let steps = *b"udlr";
    let mut word = vec![0u8; n];
    let mut count = 0;
    for code in 0u64..(1 << (2 * n)) {
        for (k, c) in word.iter_mut().enumerate() {
            *c = steps[(code >> (2 * k) & 3) as usize];
        }
        if walk_ok(&word, closed) {
            count += 1;
        }
    }
    count
}

/// Dyck words over `up`/`down` of length `n`, by filtering.
pub fn brute_dyck(up: &str, down: &str, n: usize) -> Vec<Word> {
    all_words(&[up, down], n)
        .into_iter()
        .filter(|word| {
            let mut h = 0i32;
            for l in word.letters() {
                h += if l.symbol.as_str() == up { 1 } else { -1 };
                if h < 0 {
                    return false;
                }
            }
            h == 0
        })
        .collect()
}
