use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ParseError;

use super::{Ode, OdeError, Poly};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigInt),
    Z,
    T(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let tok = match c {
            c if c.is_whitespace() => continue,
            '+' => Token::Plus,
            '-' | '−' => Token::Minus,
            '*' | '·' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '=' => Token::Eq,
            'z' => Token::Z,
            'T' => {
                let mut order = 0;
                while matches!(chars.peek(), Some('\'') | Some('′')) {
                    chars.next();
                    order += 1;
                }
                Token::T(order)
            }
            c if c.is_ascii_digit() => {
                let mut digits = c.to_string();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(d);
                    chars.next();
                }
                Token::Num(digits.parse().unwrap())
            }
            other => {
                return Err(ParseError::new(format!(
                    "unexpected character `{other}` in equation"
                )))
            }
        };
        tokens.push(tok);
    }
    Ok(tokens)
}

type RPoly = BTreeMap<u32, BigRational>;

/// A linear combination of `1, T, T', …` with rational polynomial
/// coefficients; the key `None` is the source term.
type Expr = BTreeMap<Option<usize>, RPoly>;

fn add_into(acc: &mut Expr, e: Expr, sign: i32) {
    for (k, p) in e {
        let slot = acc.entry(k).or_default();
        for (a, c) in p {
            let v = slot.entry(a).or_insert_with(BigRational::zero);
            if sign < 0 {
                *v -= c;
            } else {
                *v += c;
            }
        }
    }
}

fn scalar(c: BigRational, a: u32) -> Expr {
    [(None, [(a, c)].into_iter().collect())]
        .into_iter()
        .collect()
}

fn is_linear(e: &Expr) -> bool {
    e.iter()
        .any(|(k, p)| k.is_some() && p.values().any(|c| !c.is_zero()))
}

fn mul(x: Expr, y: Expr) -> Result<Expr, ParseError> {
    if is_linear(&x) && is_linear(&y) {
        return Err(ParseError::new(
            "product of two terms in T; the equation must be linear",
        ));
    }
    let mut out = Expr::new();
    for (kx, px) in &x {
        for (ky, py) in &y {
            let key = kx.or(*ky);
            let slot = out.entry(key).or_default();
            for (a, c) in px {
                for (b, d) in py {
                    *slot.entry(a + b).or_insert_with(BigRational::zero) += c * d;
                }
            }
        }
    }
    Ok(out)
}

struct Cursor {
    tokens: Vec<Token>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn number(&mut self, what: &str) -> Result<BigInt, ParseError> {
        match self.bump() {
            Some(Token::Num(n)) => Ok(n),
            _ => Err(ParseError::new(format!("expected {what}"))),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut acc = Expr::new();
        let mut sign = 1;
        if let Some(Token::Plus | Token::Minus) = self.peek() {
            if self.bump() == Some(Token::Minus) {
                sign = -1;
            }
        }
        loop {
            let t = self.product()?;
            add_into(&mut acc, t, sign);
            match self.peek() {
                Some(Token::Plus) => sign = 1,
                Some(Token::Minus) => sign = -1,
                _ => return Ok(acc),
            }
            self.bump();
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                }
                Some(Token::Num(_) | Token::Z | Token::T(_) | Token::LParen) => {}
                _ => return Ok(acc),
            }
            let f = self.factor()?;
            acc = mul(acc, f)?;
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Some(Token::Num(n)) => {
                let mut value = BigRational::from_integer(n);
                if self.peek() == Some(&Token::Slash) {
                    self.bump();
                    let d = self.number("a denominator after `/`")?;
                    if d.is_zero() {
                        return Err(ParseError::new("division by zero"));
                    }
                    value /= BigRational::from_integer(d);
                }
                Ok(scalar(value, 0))
            }
            Some(Token::Z) => {
                let mut power = 1u32;
                if self.peek() == Some(&Token::Caret) {
                    self.bump();
                    let p = self.number("an exponent after `^`")?;
                    power = u32::try_from(p).map_err(|_| ParseError::new("exponent too large"))?;
                }
                Ok(scalar(BigRational::one(), power))
            }
            Some(Token::T(k)) => Ok([(Some(k), [(0, BigRational::one())].into_iter().collect())]
                .into_iter()
                .collect()),
            Some(Token::LParen) => {
                let inner = self.sum()?;
                match self.bump() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(ParseError::new("expected `)`")),
                }
            }
            Some(t) => Err(ParseError::new(format!("unexpected {t:?}"))),
            None => Err(ParseError::new("unexpected end of equation")),
        }
    }
}

pub(super) fn parse_ode(text: &str) -> Result<Ode, OdeError> {
    let mut cur = Cursor {
        tokens: tokenize(text)?,
        pos: 0,
    };
    if cur.bump() != Some(Token::T(0)) || cur.bump() != Some(Token::Eq) {
        return Err(ParseError::new("equation must start with `T =`").into());
    }
    let rhs = cur.sum()?;
    if cur.peek().is_some() {
        return Err(ParseError::new(format!(
            "unexpected {:?} after the equation",
            cur.peek().unwrap()
        ))
        .into());
    }

    let lcm = rhs
        .values()
        .flat_map(|p| p.values())
        .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let to_poly = |p: &RPoly| {
        let mut out = Poly::zero();
        for (&a, c) in p {
            out.add_term(a, (c * BigRational::from_integer(lcm.clone())).to_integer());
        }
        out
    };

    let q = rhs.get(&None).map(&to_poly).unwrap_or_default();
    let order = rhs.keys().filter_map(|k| *k).max().unwrap_or(0);
    let mut qs: Vec<Poly> = (0..=order)
        .map(|i| rhs.get(&Some(i)).map(&to_poly).unwrap_or_default())
        .collect();
    // L·T = L·q + Σ L·q_i·T^(i) rearranged into the same fixed-point shape.
    if !lcm.is_one() {
        qs[0].add_term(0, BigInt::one() - &lcm);
    }
    Ok(Ode::new(q, qs))
}
