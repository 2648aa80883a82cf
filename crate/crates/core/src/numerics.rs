//! Exact scalars: rationals, binomials, falling factorials and Bernoulli numbers.
//!
//! Binomial coefficients follow the literal convention `C(a, b) = 0` whenever
//! `b < 0`, `b > a` or `a < 0`; no negative-upper-index extension is used.

use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer<T: Into<BigInt>>(value: T) -> Rational {
    Rational::from_integer(value.into())
}

/// `2^{-e}` as an exact rational.
pub fn inv_pow2(e: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << e)
}

pub fn checked_div(a: &Rational, b: &Rational) -> Result<Rational> {
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(a / b)
}

/// Renders a rational as `"numerator/denominator"`, integers included (`"5/1"`).
pub fn format_rational(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Parses `"p/q"` or a bare integer `"p"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = || Error::ParseRational(text.to_string());
    let text = text.trim();
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text, "1"),
    };
    let numer: BigInt = numer.parse().map_err(|_| bad())?;
    let denom: BigInt = denom.parse().map_err(|_| bad())?;
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(numer, denom))
}

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient with the zero convention outside `0 <= b <= a`.
pub fn binomial(a: i64, b: i64) -> BigInt {
    if a < 0 || b < 0 || b > a {
        return BigInt::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigInt::one();
    for t in 0..b {
        acc *= a - t;
        acc /= t + 1;
    }
    acc
}

pub fn binomial_rational(a: i64, b: i64) -> Rational {
    Rational::from_integer(binomial(a, b))
}

/// `x (x-1) ... (x-t+1)`, equal to 1 for `t = 0` and 0 for `t > x`.
pub fn falling_factorial(x: u64, t: u64) -> BigInt {
    if t > x {
        return BigInt::zero();
    }
    (0..t).fold(BigInt::one(), |acc, s| acc * (x - s))
}

/// Memoized Bernoulli numbers with `B_1 = -1/2`.
#[derive(Debug, Clone)]
pub struct BernoulliTable {
    values: Vec<Rational>,
}

impl Default for BernoulliTable {
    fn default() -> Self {
        Self::new()
    }
}

impl BernoulliTable {
    pub fn new() -> Self {
        Self {
            values: vec![Rational::one()],
        }
    }

    pub fn up_to(k_max: usize) -> Self {
        let mut table = Self::new();
        table.extend_to(k_max);
        table
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fills the table through index `k` using
    /// `sum_{j=0}^{m} C(m+1, j) B_j = 0`.
    pub fn extend_to(&mut self, k: usize) {
        while self.values.len() <= k {
            let m = self.values.len();
            if m >= 3 && m % 2 == 1 {
                self.values.push(Rational::zero());
                continue;
            }
            let sum = self
                .values
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (j, b)| {
                    acc + b * binomial_rational(m as i64 + 1, j as i64)
                });
            self.values.push(-sum / integer(m as i64 + 1));
        }
    }

    pub fn get(&mut self, k: usize) -> Rational {
        self.extend_to(k);
        self.values[k].clone()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }
}

static BERNOULLI: Mutex<Option<BernoulliTable>> = Mutex::new(None);

/// The k-th Bernoulli number, served from a process-wide memo table.
pub fn bernoulli(k: usize) -> Rational {
    let mut guard = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    guard.get_or_insert_with(BernoulliTable::new).get(k)
}

/// Snapshot of `B_0..=B_k_max`, taking the lock once.
pub fn bernoulli_numbers(k_max: usize) -> Vec<Rational> {
    let mut guard = BERNOULLI.lock().unwrap_or_else(|e| e.into_inner());
    let table = guard.get_or_insert_with(BernoulliTable::new);
    table.extend_to(k_max);
    table.values()[..=k_max].to_vec()
}

/// `sum_{k=0}^{n} C(n,k) B_k 2^k - (2 - 2^n) B_n`; zero for every `n >= 1`.
pub fn bernoulli_identity_residual(n: usize) -> Rational {
    let b = bernoulli_numbers(n);
    let lhs = (0..=n).fold(Rational::zero(), |acc, k| {
        acc + binomial_rational(n as i64, k as i64) * &b[k] * integer(BigInt::one() << k)
    });
    let rhs = (integer(2) - integer(BigInt::one() << n)) * &b[n];
    lhs - rhs
}

/// Rational enclosure `PI_LOWER < pi < PI_UPPER` (14 decimal places).
pub fn pi_bounds() -> (Rational, Rational) {
    let scale = 100_000_000_000_000i64;
    (
        rational(314_159_265_358_979, scale),
        rational(314_159_265_358_980, scale),
    )
}

/// Evaluates `|B_{2m}| <= c (2m)! / (2 pi)^{2m}` with a rational stand-in
/// for pi. A lower stand-in enlarges the right-hand side, an upper one
/// shrinks it.
pub fn bernoulli_magnitude_bound_holds(m: usize, constant: &Rational, pi: &Rational) -> bool {
    let b = bernoulli(2 * m).abs();
    let two_pi = integer(2) * pi;
    let denom = num_traits::pow(two_pi, 2 * m);
    let bound = constant * integer(factorial(2 * m as u64)) / denom;
    b <= bound
}

/// `A_i = 1 + i + sum_{s=2}^{i} 2^s |B_s| C(i, s)`.
pub fn a_constant(i: usize) -> Rational {
    let b = bernoulli_numbers(i.max(1));
    let tail = (2..=i).fold(Rational::zero(), |acc, s| {
        acc + integer(BigInt::one() << s) * b[s].abs() * binomial_rational(i as i64, s as i64)
    });
    integer(1 + i as i64) + tail
}

/// `n! / m!` for `m <= n`.
pub fn factorial_ratio(n: u64, m: u64) -> BigInt {
    debug_assert!(m <= n);
    (m + 1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Serde adapters that write rationals as `"p/q"` strings.
pub mod rational_str {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::{format_rational, parse_rational, Rational};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(values.iter().map(format_rational))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|t| parse_rational(t).map_err(D::Error::custom))
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(value: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match value {
                Some(v) => s.serialize_some(&format_rational(v)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|t| parse_rational(&t).map_err(D::Error::custom))
                .transpose()
        }
    }

    pub mod nested {
        use super::*;

        pub fn serialize<S: Serializer>(rows: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(
                rows.iter()
                    .map(|row| row.iter().map(format_rational).collect::<Vec<_>>()),
            )
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<Vec<Rational>>, D::Error> {
            Vec::<Vec<String>>::deserialize(d)?
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|t| parse_rational(t).map_err(D::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}
