//! Exact constructions of the shelf-shuffle matrices.
//!
//! Deck positions and card labels are 1-based (`1..=n`) in every public
//! formula, matching how the matrices are usually written down. Storage and
//! the falling-factorial basis indices are 0-based (`0..n`).

use std::collections::VecDeque;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{check_deck, Error, Result};
use crate::numerics::{
    binomial, factorial, factorial_ratio, falling_factorial, integer, inv_pow2, Rational,
};

/// Largest deck the exhaustive oracle will enumerate (`2^20` outcomes).
pub const BRUTE_FORCE_MAX_N: usize = 20;

/// Dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| {
            if r == c {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    /// Builds a matrix from a 0-based `(row, col)` generator.
    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Rational + Sync,
    {
        let entries = (0..rows * cols)
            .into_par_iter()
            .map(|idx| f(idx / cols, idx % cols))
            .collect();
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn diagonal(values: &[Rational]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (k, v) in values.iter().enumerate() {
            m.entries[k * n + k] = v.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    /// 0-based entry access.
    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    /// Exact product; output rows are computed in parallel.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let cols = other.cols;
        let mut entries = vec![Rational::zero(); self.rows * cols];
        entries
            .par_chunks_mut(cols.max(1))
            .enumerate()
            .for_each(|(r, out)| {
                for (k, a) in self.row(r).iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (slot, b) in out.iter_mut().zip(other.row(k)) {
                        if !b.is_zero() {
                            *slot += a * b;
                        }
                    }
                }
            });
        Ok(Self {
            rows: self.rows,
            cols,
            entries,
        })
    }

    /// `A x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{} columns times vector of length {}",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), x)).collect())
    }

    /// `y^T A` for a row vector `y`.
    pub fn vec_mul(&self, y: &[Rational]) -> Result<Vec<Rational>> {
        if y.len() != self.rows {
            return Err(Error::Dimension(format!(
                "vector of length {} times {} rows",
                y.len(),
                self.rows
            )));
        }
        let mut out = vec![Rational::zero(); self.cols];
        for (r, coeff) in y.iter().enumerate() {
            if coeff.is_zero() {
                continue;
            }
            for (slot, a) in out.iter_mut().zip(self.row(r)) {
                if !a.is_zero() {
                    *slot += coeff * a;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Dimension("sum of differently sized matrices".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    /// `A^k` by repeated multiplication (`A^0 = I`).
    pub fn pow(&self, k: usize) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Dimension("power of a non-square matrix".into()));
        }
        let mut acc = Self::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    pub fn row_sums(&self) -> Vec<Rational> {
        (0..self.rows).map(|r| self.row(r).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<Rational> {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self.get(r, c)).sum())
            .collect()
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.rows).all(|r| (0..r.min(self.cols)).all(|c| self.get(r, c).is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|r| (r + 1..self.cols).all(|c| self.get(r, c).is_zero()))
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

fn c_binomial(a: usize, b: isize) -> BigInt {
    binomial(a as i64, b as i64)
}

/// `M(i, j) = 2^{-i} (C(i-1, j-1) + C(i-1, n-j))`, 1-based.
pub fn position_entry(n: usize, i: usize, j: usize) -> Rational {
    debug_assert!((1..=n).contains(&i) && (1..=n).contains(&j));
    let count = c_binomial(i - 1, j as isize - 1) + c_binomial(i - 1, (n - j) as isize);
    Rational::new(count, BigInt::one() << i)
}

/// Position matrix of one single-shelf shuffle: entry `(i, j)` is the
/// probability that card `i` ends at position `j`.
pub fn position_matrix(n: usize) -> Result<RationalMatrix> {
    check_deck(n)?;
    Ok(RationalMatrix::from_fn(n, n, |r, c| {
        position_entry(n, r + 1, c + 1)
    }))
}

/// Lower-triangular factor with `L(i, j) = 2^{-i} C(i-1, j-1)`.
pub fn lower_l(n: usize) -> Result<RationalMatrix> {
    check_deck(n)?;
    Ok(RationalMatrix::from_fn(n, n, |r, c| {
        Rational::new(c_binomial(r, c as isize), BigInt::one() << (r + 1))
    }))
}

/// Order-reversing permutation: `P(i, j) = 1` iff `j = n - i + 1`.
pub fn flip_p(n: usize) -> Result<RationalMatrix> {
    check_deck(n)?;
    Ok(RationalMatrix::from_fn(n, n, |r, c| {
        if r + c == n - 1 {
            Rational::one()
        } else {
            Rational::zero()
        }
    }))
}

/// Falling-factorial basis: column `j` holds `(k-1)^{(j)}` for `k = 1..=n`.
pub fn basis_b(n: usize) -> Result<RationalMatrix> {
    check_deck(n)?;
    Ok(RationalMatrix::from_fn(n, n, |r, c| {
        integer(falling_factorial(r as u64, c as u64))
    }))
}

/// Closed-form inverse of [`basis_b`]:
/// `(-1)^{k-l} C(k-1, l-1) / (k-1)!` for `l <= k`.
pub fn basis_b_inverse(n: usize) -> Result<RationalMatrix> {
    check_deck(n)?;
    Ok(RationalMatrix::from_fn(n, n, |r, c| {
        if c > r {
            return Rational::zero();
        }
        let mut numer = c_binomial(r, c as isize);
        if (r - c) % 2 == 1 {
            numer = -numer;
        }
        Rational::new(numer, factorial(r as u64))
    }))
}

/// Coefficients `c_N(k, m)` for `k = 0..=m` in
/// `(N - x)^{(m)} = sum_k c_N(k, m) x^{(k)}`.
pub fn c_coefficients(big_n: usize, m: usize) -> Result<Vec<Rational>> {
    if m > big_n {
        return Err(Error::OrderExceedsN { m, big_n });
    }
    Ok((0..=m).map(|k| c_coefficient(big_n, k, m)).collect())
}

fn c_coefficient(big_n: usize, k: usize, m: usize) -> Rational {
    let mut value =
        binomial(m as i64, k as i64) * factorial_ratio((big_n - k) as u64, (big_n - m) as u64);
    if k % 2 == 1 {
        value = -value;
    }
    integer(value)
}

/// Matrix of `M` in the falling-factorial basis (0-based, upper triangular).
pub fn t_matrix(n: usize) -> Result<RationalMatrix> {
    check_deck(n)?;
    Ok(RationalMatrix::from_fn(n, n, |j, k| {
        if k < j {
            Rational::zero()
        } else if k == j {
            if j % 2 == 0 {
                inv_pow2(j)
            } else {
                Rational::zero()
            }
        } else {
            inv_pow2(j + 1) * c_coefficient(n - 1, j, k)
        }
    }))
}

/// Applies one single-shelf shuffle given one top/bottom flip per card.
///
/// The deck is read top to bottom and cards are drawn from the bottom, so
/// the flip for card `n` is consumed first and card 1's last. A set bit
/// `flips >> (n - card)` puts that card on top of the pile.
pub(crate) fn shelf_outcome(n: usize, flips: u64) -> Vec<usize> {
    let mut pile = VecDeque::with_capacity(n);
    for (step, card) in (1..=n).rev().enumerate() {
        if flips >> step & 1 == 1 {
            pile.push_front(card);
        } else {
            pile.push_back(card);
        }
    }
    pile.into()
}

/// Exhaustive oracle: enumerates all `2^n` flip sequences and returns the
/// exact frequency with which card `i` lands at position `j`.
pub fn brute_force_position_matrix(n: usize) -> Result<RationalMatrix> {
    if !(2..=BRUTE_FORCE_MAX_N).contains(&n) {
        return Err(Error::DeckOutOfRange {
            n,
            min: 2,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    let outcomes = 1u64 << n;
    let counts = (0..outcomes)
        .into_par_iter()
        .fold(
            || vec![0u64; n * n],
            |mut acc, flips| {
                for (pos, card) in shelf_outcome(n, flips).into_iter().enumerate() {
                    acc[(card - 1) * n + pos] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let denom = BigInt::from(outcomes);
    Ok(RationalMatrix::from_fn(n, n, |r, c| {
        Rational::new(BigInt::from(counts[r * n + c]), denom.clone())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational;

    fn m(rows: &[&[(i64, i64)]]) -> RationalMatrix {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&(p, q)| rational(p, q)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn ints(rows: &[&[i64]]) -> RationalMatrix {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|&p| integer(p)).collect())
                .collect(),
        )
        .unwrap()
    }

    /// Independent forward-substitution inverse for lower-triangular input.
    fn lower_inverse(a: &RationalMatrix) -> RationalMatrix {
        let n = a.rows();
        let mut inv = RationalMatrix::zeros(n, n).to_rows();
        for col in 0..n {
            for r in 0..n {
                let mut rhs = if r == col {
                    Rational::one()
                } else {
                    Rational::zero()
                };
                for k in 0..r {
                    rhs -= a.get(r, k) * &inv[k][col];
                }
                inv[r][col] = rhs / a.get(r, r);
            }
        }
        RationalMatrix::from_rows(inv).unwrap()
    }

    fn falling(x: i64, t: usize) -> Rational {
        (0..t as i64).fold(Rational::one(), |acc, s| acc * integer(x - s))
    }

    #[test]
    fn small_position_matrices() {
        assert_eq!(
            position_matrix(2).unwrap(),
            m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]])
        );
        assert_eq!(
            position_matrix(3).unwrap(),
            m(&[
                &[(1, 2), (0, 1), (1, 2)],
                &[(1, 4), (1, 2), (1, 4)],
                &[(1, 4), (1, 2), (1, 4)],
            ])
        );
        assert!(matches!(
            position_matrix(1),
            Err(Error::DeckTooSmall { .. })
        ));
    }

    #[test]
    fn counterexample_entries() {
        assert_eq!(position_entry(24, 19, 10), rational(1615, 16384));
        assert_eq!(position_entry(24, 20, 10), rational(52003, 524288));
    }

    #[test]
    fn doubly_stochastic() {
        for n in 2..=40 {
            let pm = position_matrix(n).unwrap();
            assert!(pm.row_sums().iter().all(Rational::is_one), "rows n={n}");
            assert!(pm.col_sums().iter().all(Rational::is_one), "cols n={n}");
        }
    }

    #[test]
    fn factorization_l_times_i_plus_p() {
        assert_eq!(
            lower_l(2).unwrap(),
            m(&[&[(1, 2), (0, 1)], &[(1, 4), (1, 4)]])
        );
        for n in 2..=64 {
            let l = lower_l(n).unwrap();
            let p = flip_p(n).unwrap();
            assert!(l.is_lower_triangular());
            assert_eq!(p.mul(&p).unwrap(), RationalMatrix::identity(n));
            let ip = RationalMatrix::identity(n).add(&p).unwrap();
            assert_eq!(l.mul(&ip).unwrap(), position_matrix(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn basis_b_small_and_eigenbasis_of_l() {
        assert_eq!(
            basis_b(3).unwrap(),
            ints(&[&[1, 0, 0], &[1, 1, 0], &[1, 2, 2]])
        );
        for n in 2..=24 {
            let b = basis_b(n).unwrap();
            assert!(b.column(0).iter().all(Rational::is_one));
            let diag: Vec<Rational> = (1..=n).map(inv_pow2).collect();
            let lhs = lower_l(n).unwrap().mul(&b).unwrap();
            let rhs = b.mul(&RationalMatrix::diagonal(&diag)).unwrap();
            assert_eq!(lhs, rhs, "n={n}");
        }
    }

    #[test]
    fn basis_inverse_closed_form() {
        assert_eq!(
            basis_b_inverse(3).unwrap(),
            m(&[
                &[(1, 1), (0, 1), (0, 1)],
                &[(-1, 1), (1, 1), (0, 1)],
                &[(1, 2), (-1, 1), (1, 2)]
            ])
        );
        assert_eq!(*basis_b_inverse(4).unwrap().get(3, 0), rational(-1, 6));
        for n in [3, 4, 7, 12] {
            assert_eq!(
                basis_b_inverse(n).unwrap(),
                lower_inverse(&basis_b(n).unwrap())
            );
        }
        for n in 2..=32 {
            let b = basis_b(n).unwrap();
            let bi = basis_b_inverse(n).unwrap();
            assert_eq!(b.mul(&bi).unwrap(), RationalMatrix::identity(n), "n={n}");
        }
    }

    #[test]
    fn basis_inverse_row_is_not_the_plain_power_coefficient() {
        // The x^2 coefficient of x(x-1) is 1, the inverse entry is 1/2.
        assert_eq!(*basis_b_inverse(3).unwrap().get(2, 2), rational(1, 2));
    }

    #[test]
    fn c_coefficient_examples() {
        assert_eq!(
            c_coefficients(4, 2).unwrap(),
            vec![integer(12), integer(-6), integer(1)]
        );
        for x in 0..=4i64 {
            let lhs = falling(4 - x, 2);
            let rhs: Rational = c_coefficients(4, 2)
                .unwrap()
                .iter()
                .enumerate()
                .map(|(k, c)| c * falling(x, k))
                .sum();
            assert_eq!(lhs, rhs);
        }
        assert_eq!(
            c_coefficients(3, 4),
            Err(Error::OrderExceedsN { m: 4, big_n: 3 })
        );
    }

    #[test]
    fn c_coefficient_identity_pointwise() {
        for big_n in 0..=20usize {
            for m in 0..=big_n {
                let c = c_coefficients(big_n, m).unwrap();
                assert_eq!(c[m], integer(if m % 2 == 0 { 1 } else { -1 }));
                assert_eq!(c[0], integer(falling_factorial(big_n as u64, m as u64)));
                for x in 0..=big_n as i64 {
                    let rhs: Rational =
                        c.iter().enumerate().map(|(k, ck)| ck * falling(x, k)).sum();
                    assert_eq!(falling(big_n as i64 - x, m), rhs, "N={big_n} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn t_matrix_small_and_diagonal() {
        assert_eq!(
            t_matrix(3).unwrap(),
            m(&[
                &[(1, 1), (1, 1), (1, 1)],
                &[(0, 1), (0, 1), (-1, 2)],
                &[(0, 1), (0, 1), (1, 4)]
            ])
        );
        let t9 = t_matrix(9).unwrap();
        let diag: Vec<Rational> = (0..9).map(|j| t9.get(j, j).clone()).collect();
        let expected: Vec<Rational> = [1, 0, 4, 0, 16, 0, 64, 0, 256]
            .iter()
            .map(|&d| {
                if d == 0 {
                    Rational::zero()
                } else {
                    rational(1, d)
                }
            })
            .collect();
        assert_eq!(diag, expected);
    }

    #[test]
    fn t_is_m_in_falling_factorial_basis() {
        for n in 2..=32 {
            let b = basis_b(n).unwrap();
            let bi = basis_b_inverse(n).unwrap();
            let t = bi
                .mul(&position_matrix(n).unwrap())
                .unwrap()
                .mul(&b)
                .unwrap();
            assert!(t.is_upper_triangular());
            assert_eq!(t, t_matrix(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn shelf_outcome_follows_draw_order() {
        // Card 3 is drawn first and card 1 last; bit s belongs to the s-th draw.
        assert_eq!(shelf_outcome(3, 0b111), vec![1, 2, 3]);
        assert_eq!(shelf_outcome(3, 0b001), vec![3, 2, 1]);
        assert_eq!(shelf_outcome(3, 0b000), vec![3, 2, 1]);
    }

    #[test]
    fn brute_force_matches_formula() {
        assert_eq!(
            brute_force_position_matrix(2).unwrap(),
            m(&[&[(1, 2), (1, 2)], &[(1, 2), (1, 2)]])
        );
        for n in 2..=14 {
            assert_eq!(
                brute_force_position_matrix(n).unwrap(),
                position_matrix(n).unwrap(),
                "n={n}"
            );
        }
        assert!(brute_force_position_matrix(1).is_err());
        assert!(brute_force_position_matrix(21).is_err());
    }
}
