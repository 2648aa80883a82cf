//! Closed-form eigenstructure of `M` and of its falling-factorial
//! representation `T`.
//!
//! Only the even indices `i` in `0..n` carry nonzero eigenvalues `2^{-i}`.
//! The remaining `floor(n/2)` dimensions form the kernel, spanned by
//! `e_j - e_{n-j+1}`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_deck, Error, Result};
use crate::matrices::{basis_b, basis_b_inverse, dot, position_matrix, t_matrix, RationalMatrix};
use crate::numerics::{
    bernoulli_numbers, binomial, factorial, factorial_ratio, falling_factorial, integer, inv_pow2,
    rational_str, Rational,
};

/// Even indices `0, 2, 4, ...` below `n`.
pub fn even_indices(n: usize) -> Vec<usize> {
    (0..n).step_by(2).collect()
}

/// [`even_indices`] without 0.
pub fn nonzero_even_indices(n: usize) -> Vec<usize> {
    (2..n).step_by(2).collect()
}

fn check_index(n: usize, i: usize) -> Result<()> {
    check_deck(n)?;
    if i % 2 == 1 {
        return Err(Error::OddIndex { i });
    }
    if i >= n {
        return Err(Error::IndexOutOfRange { i, n });
    }
    Ok(())
}

/// `eta_j = e_j - e_{n-j+1}` for `1 <= j <= floor(n/2)`.
pub fn kernel_basis(n: usize) -> Result<Vec<Vec<Rational>>> {
    check_deck(n)?;
    Ok((0..n / 2)
        .map(|j| {
            let mut v = vec![Rational::zero(); n];
            v[j] = Rational::one();
            v[n - 1 - j] = -Rational::one();
            v
        })
        .collect())
}

/// Right eigenvector of `T` for `2^{-i}`:
/// `w_t = 2^{i-t} B_{i-t} C(i,t) (n-t-1)!/(n-i-1)!` for `t <= i`, zero beyond.
pub fn right_eigvec_t(n: usize, i: usize) -> Result<Vec<Rational>> {
    check_index(n, i)?;
    let bern = bernoulli_numbers(i);
    Ok((0..n)
        .map(|t| {
            if t > i {
                return Rational::zero();
            }
            let scale = binomial(i as i64, t as i64)
                * factorial_ratio((n - t - 1) as u64, (n - i - 1) as u64)
                * (BigInt::one() << (i - t));
            &bern[i - t] * integer(scale)
        })
        .collect())
}

/// `zeta_i(k) = sum_t w_t (k-1)^{(t)}`, i.e. `B w`.
pub fn right_eigvec_m(n: usize, i: usize) -> Result<Vec<Rational>> {
    let w = right_eigvec_t(n, i)?;
    Ok(basis_apply(&w))
}

fn basis_apply(w: &[Rational]) -> Vec<Rational> {
    let n = w.len();
    (0..n)
        .map(|k| {
            w.iter()
                .enumerate()
                .filter(|(t, wt)| *t <= k && !wt.is_zero())
                .map(|(t, wt)| wt * integer(falling_factorial(k as u64, t as u64)))
                .sum()
        })
        .collect()
}

/// Left eigenvector of `T`: zero below `i`, then
/// `C(t,i) (n-1-i)! / ((t-i+1) (n-1-t)!)`.
pub fn left_eigvec_t(n: usize, i: usize) -> Result<Vec<Rational>> {
    check_index(n, i)?;
    Ok((0..n)
        .map(|t| {
            if t < i {
                return Rational::zero();
            }
            let numer = binomial(t as i64, i as i64)
                * factorial_ratio((n - 1 - i) as u64, (n - 1 - t) as u64);
            Rational::new(numer, BigInt::from(t - i + 1))
        })
        .collect())
}

/// Left eigenvector of `M`, defined as `w~^T B^{-1}`.
pub fn left_eigvec_m(n: usize, i: usize) -> Result<Vec<Rational>> {
    let wt = left_eigvec_t(n, i)?;
    let b_inv = basis_b_inverse(n)?;
    b_inv.vec_mul(&wt)
}

/// The printed closed form
/// `[(-1)^{i-a} C(i-1,a-1) + (-1)^{n-1-a} C(i-1, a-1-(n-i))] / (i! (n-i))`.
///
/// Defined for even `i >= 2`; at `i = 0` it would need `C(-1, .)`.
pub fn left_eigvec_m_closed_form(n: usize, i: usize) -> Result<Vec<Rational>> {
    check_index(n, i)?;
    if i == 0 {
        return Err(Error::IndexOutOfRange { i, n });
    }
    let denom = factorial(i as u64) * BigInt::from(n - i);
    Ok((1..=n as i64)
        .map(|a| {
            let (i, n) = (i as i64, n as i64);
            let mut first = binomial(i - 1, a - 1);
            if (i - a).rem_euclid(2) == 1 {
                first = -first;
            }
            let mut second = binomial(i - 1, a - 1 - (n - i));
            if (n - 1 - a).rem_euclid(2) == 1 {
                second = -second;
            }
            Rational::new(first + second, denom.clone())
        })
        .collect())
}

/// Returns `Some(s)` with `s = +1` or `-1` when `closed = s * defined`.
pub fn closed_form_sign(defined: &[Rational], closed: &[Rational]) -> Option<i8> {
    if defined == closed {
        Some(1)
    } else if defined.iter().zip(closed).all(|(d, c)| *d == -c) {
        Some(-1)
    } else {
        None
    }
}

/// One nonzero eigenvalue `2^{-i}` together with its vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenMode {
    pub index: usize,
    #[serde(with = "rational_str")]
    pub eigenvalue: Rational,
    #[serde(with = "rational_str::vec")]
    pub right_t: Vec<Rational>,
    #[serde(with = "rational_str::vec")]
    pub right_m: Vec<Rational>,
    #[serde(with = "rational_str::vec")]
    pub left_t: Vec<Rational>,
    #[serde(with = "rational_str::vec")]
    pub left_m: Vec<Rational>,
    /// Global sign relating the printed closed form to `left_m`; absent at `i = 0`.
    pub closed_form_sign: Option<i8>,
}

/// Full eigenstructure of the `n`-card position matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub n: usize,
    pub modes: Vec<EigenMode>,
    #[serde(with = "rational_str::nested")]
    pub kernel: Vec<Vec<Rational>>,
}

impl EigenSystem {
    pub fn compute(n: usize) -> Result<Self> {
        check_deck(n)?;
        let b_inv = basis_b_inverse(n)?;
        let modes = even_indices(n)
            .into_par_iter()
            .map(|i| -> Result<EigenMode> {
                let right_t = right_eigvec_t(n, i)?;
                let right_m = basis_apply(&right_t);
                let left_t = left_eigvec_t(n, i)?;
                let left_m = b_inv.vec_mul(&left_t)?;
                let closed_form_sign = if i == 0 {
                    None
                } else {
                    closed_form_sign(&left_m, &left_eigvec_m_closed_form(n, i)?)
                };
                Ok(EigenMode {
                    index: i,
                    eigenvalue: inv_pow2(i),
                    right_t,
                    right_m,
                    left_t,
                    left_m,
                    closed_form_sign,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            modes,
            kernel: kernel_basis(n)?,
        })
    }

    pub fn mode(&self, i: usize) -> Option<&EigenMode> {
        self.modes.iter().find(|m| m.index == i)
    }

    pub fn eigenvalues(&self) -> Vec<Rational> {
        self.modes.iter().map(|m| m.eigenvalue.clone()).collect()
    }

    /// Re-derives every exact invariant from `M`, `T` and `B`.
    pub fn check(&self) -> Result<SpectralChecks> {
        let n = self.n;
        let m = position_matrix(n)?;
        let t = t_matrix(n)?;
        let b = basis_b(n)?;
        let shape_ok = self.modes.iter().all(|md| {
            md.right_t.len() == n
                && md.right_m.len() == n
                && md.left_t.len() == n
                && md.left_m.len() == n
        }) && self.kernel.iter().all(|v| v.len() == n);
        if !shape_ok {
            return Err(Error::Dimension(
                "eigen system vectors have the wrong length".into(),
            ));
        }

        let scaled =
            |v: &[Rational], s: &Rational| -> Vec<Rational> { v.iter().map(|x| x * s).collect() };
        let mut right_m = true;
        let mut left_m = true;
        let mut right_t = true;
        let mut left_t = true;
        let mut change_of_basis = true;
        let mut eigenvalues = true;
        let mut closed_form = true;
        for md in &self.modes {
            let lam = &md.eigenvalue;
            eigenvalues &= md.index % 2 == 0
                && *lam == inv_pow2(md.index)
                && *t.get(md.index, md.index) == *lam;
            right_m &= md.right_m.iter().any(|x| !x.is_zero())
                && m.mul_vec(&md.right_m)? == scaled(&md.right_m, lam);
            left_m &= md.left_m.iter().any(|x| !x.is_zero())
                && m.vec_mul(&md.left_m)? == scaled(&md.left_m, lam);
            right_t &= t.mul_vec(&md.right_t)? == scaled(&md.right_t, lam);
            left_t &= t.vec_mul(&md.left_t)? == scaled(&md.left_t, lam);
            change_of_basis &=
                b.mul_vec(&md.right_t)? == md.right_m && b.vec_mul(&md.left_m)? == md.left_t;
            closed_form &= md.index == 0 || md.closed_form_sign.is_some();
        }
        let indices: Vec<usize> = self.modes.iter().map(|md| md.index).collect();
        eigenvalues &= indices == even_indices(n);

        let mut biorthogonal_m = true;
        let mut biorthogonal_t = true;
        for a in &self.modes {
            for c in &self.modes {
                let expected = if a.index == c.index {
                    Rational::one()
                } else {
                    Rational::zero()
                };
                biorthogonal_m &= dot(&a.left_m, &c.right_m) == expected;
                biorthogonal_t &= dot(&a.left_t, &c.right_t) == expected;
            }
        }

        let expected_kernel = kernel_basis(n)?;
        let mut kernel_null = self.kernel == expected_kernel;
        for v in &self.kernel {
            kernel_null &= m.mul_vec(v)?.iter().all(Rational::is_zero);
        }
        let left_annihilates_kernel = self
            .modes
            .iter()
            .all(|md| self.kernel.iter().all(|v| dot(&md.left_m, v).is_zero()));
        let dimension_count = self.modes.len() + self.kernel.len() == n;

        Ok(SpectralChecks {
            eigenvalues,
            right_m,
            left_m,
            right_t,
            left_t,
            biorthogonal_m,
            biorthogonal_t,
            change_of_basis,
            kernel_null,
            left_annihilates_kernel,
            dimension_count,
            closed_form_up_to_sign: closed_form,
        })
    }
}

/// Outcome of [`EigenSystem::check`], one flag per invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralChecks {
    pub eigenvalues: bool,
    pub right_m: bool,
    pub left_m: bool,
    pub right_t: bool,
    pub left_t: bool,
    pub biorthogonal_m: bool,
    pub biorthogonal_t: bool,
    pub change_of_basis: bool,
    pub kernel_null: bool,
    pub left_annihilates_kernel: bool,
    pub dimension_count: bool,
    pub closed_form_up_to_sign: bool,
}

impl SpectralChecks {
    pub fn named(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("eigenvalues", self.eigenvalues),
            ("right_eigen_equation_m", self.right_m),
            ("left_eigen_equation_m", self.left_m),
            ("right_eigen_equation_t", self.right_t),
            ("left_eigen_equation_t", self.left_t),
            ("biorthogonality_m", self.biorthogonal_m),
            ("biorthogonality_t", self.biorthogonal_t),
            ("change_of_basis", self.change_of_basis),
            ("kernel_null", self.kernel_null),
            ("left_annihilates_kernel", self.left_annihilates_kernel),
            ("dimension_count", self.dimension_count),
            ("closed_form_left_up_to_sign", self.closed_form_up_to_sign),
        ]
    }

    pub fn all(&self) -> bool {
        self.named().iter().all(|(_, ok)| *ok)
    }
}

/// `M^k = J/n + sum_{j even, j>0} 2^{-jk} zeta_j (x) zeta~_j` for `k >= 1`.
pub fn spectral_power(n: usize, k: usize) -> Result<RationalMatrix> {
    check_deck(n)?;
    if k == 0 {
        return Err(Error::ZeroPower);
    }
    let system = EigenSystem::compute(n)?;
    spectral_power_of(&system, k)
}

pub fn spectral_power_of(system: &EigenSystem, k: usize) -> Result<RationalMatrix> {
    if k == 0 {
        return Err(Error::ZeroPower);
    }
    let n = system.n;
    let terms: Vec<(Vec<Rational>, &[Rational])> = system
        .modes
        .iter()
        .filter(|md| md.index != 0)
        .map(|md| {
            let weight = inv_pow2(md.index * k);
            (
                md.right_m.iter().map(|x| x * &weight).collect(),
                md.left_m.as_slice(),
            )
        })
        .collect();
    let base = Rational::new(BigInt::one(), BigInt::from(n));
    Ok(RationalMatrix::from_fn(n, n, |r, c| {
        terms.iter().fold(base.clone(), |acc, (right, left)| {
            acc + &right[r] * &left[c]
        })
    }))
}

/// ℓ∞ norms of the eigenvectors for one index, with the closed bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormReport {
    pub index: usize,
    #[serde(with = "rational_str")]
    pub right_norm: Rational,
    #[serde(with = "rational_str")]
    pub right_bound: Rational,
    #[serde(with = "rational_str")]
    pub left_norm: Rational,
    #[serde(with = "rational_str")]
    pub left_bound: Rational,
    pub right_ok: bool,
    pub left_ok: bool,
}

fn linf(v: &[Rational]) -> Rational {
    v.iter()
        .map(Signed::abs)
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Right bound `4 i! n^i` (1 at `i = 0`); left bound `2^i / (i! (n-i))`.
pub fn linf_norms(n: usize) -> Result<Vec<NormReport>> {
    linf_norms_of(&EigenSystem::compute(n)?)
}

pub fn linf_norms_of(system: &EigenSystem) -> Result<Vec<NormReport>> {
    let n = system.n;
    Ok(system
        .modes
        .iter()
        .map(|md| {
            let i = md.index;
            let right_bound = if i == 0 {
                Rational::one()
            } else {
                integer(BigInt::from(4) * factorial(i as u64) * num_traits::pow(BigInt::from(n), i))
            };
            let left_bound = Rational::new(
                BigInt::one() << i,
                factorial(i as u64) * BigInt::from(n - i),
            );
            let right_norm = linf(&md.right_m);
            let left_norm = linf(&md.left_m);
            NormReport {
                index: i,
                right_ok: right_norm <= right_bound,
                left_ok: left_norm <= left_bound,
                right_norm,
                right_bound,
                left_norm,
                left_bound,
            }
        })
        .collect())
}

/// `v(k) = n^2 - 3nk + (3/2) k (k+1) - 1` for `k = 1..=n`, the conjectured
/// eigenvector for the eigenvalue `1/4`.
pub fn quarter_mode_witness(n: usize) -> Result<Vec<Rational>> {
    if n < 3 {
        return Err(Error::DeckTooSmall { n, min: 3 });
    }
    let n = n as i64;
    Ok((1..=n)
        .map(|k| {
            Rational::new(
                BigInt::from(2 * n * n - 6 * n * k + 3 * k * (k + 1) - 2),
                BigInt::from(2),
            )
        })
        .collect())
}

/// Whether the computed `zeta_2` equals `(2/3) v` exactly.
pub fn quarter_mode_matches_witness(n: usize) -> Result<bool> {
    let zeta = right_eigvec_m(n, 2)?;
    let factor = Rational::new(BigInt::from(2), BigInt::from(3));
    Ok(quarter_mode_witness(n)?
        .iter()
        .zip(&zeta)
        .all(|(v, z)| v * &factor == *z))
}
