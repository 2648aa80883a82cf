//! Full exact invariant suite for one deck size.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_deck, Result};
use crate::float::PmfTable;
use crate::guessing::{envelope_check, DEFAULT_SLACK};
use crate::matrices::{
    basis_b, basis_b_inverse, brute_force_position_matrix, flip_p, lower_l, position_matrix,
    t_matrix, RationalMatrix,
};
use crate::numerics::{a_constant, bernoulli_identity_residual, factorial, integer};
use crate::spectral::{
    linf_norms_of, quarter_mode_matches_witness, spectral_power_of, EigenSystem,
};

/// Largest deck for which `verify` also enumerates every shuffle outcome.
pub const BRUTE_FORCE_VERIFY_MAX_N: usize = 16;

/// Powers `M^k`, `k = 1..=POWER_CHECK_MAX_K`, compared against the spectral sum.
pub const POWER_CHECK_MAX_K: usize = 3;

/// The envelope's upper side is only asserted from this deck size on.
pub const ENVELOPE_UPPER_FROM: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub n: usize,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Suite(Vec<CheckResult>);

impl Suite {
    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.0.push(CheckResult {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

fn is_doubly_stochastic(m: &RationalMatrix) -> bool {
    m.entries().iter().all(|x| *x >= crate::Rational::zero())
        && m.row_sums().iter().all(One::is_one)
        && m.col_sums().iter().all(One::is_one)
}

/// Runs every exact invariant for an `n`-card deck. A system read from
/// elsewhere (for instance a cache) may be supplied; it is checked as given.
pub fn verify(n: usize, system: Option<EigenSystem>) -> Result<VerifyReport> {
    check_deck(n)?;
    let mut suite = Suite(Vec::new());
    let m = position_matrix(n)?;

    suite.push(
        "matrix.doubly_stochastic",
        is_doubly_stochastic(&m),
        "entries >= 0, rows and columns sum to 1",
    );

    let i_plus_p = RationalMatrix::identity(n).add(&flip_p(n)?)?;
    suite.push(
        "matrix.factorization",
        lower_l(n)?.mul(&i_plus_p)? == m,
        "M = L (I + P)",
    );

    let b = basis_b(n)?;
    let b_inv = basis_b_inverse(n)?;
    suite.push(
        "basis.inverse",
        b.mul(&b_inv)? == RationalMatrix::identity(n),
        "B B^-1 = I",
    );
    let t = t_matrix(n)?;
    suite.push(
        "basis.change_of_basis",
        b_inv.mul(&m)?.mul(&b)? == t,
        "B^-1 M B = T",
    );
    suite.push(
        "basis.t_upper_triangular",
        t.is_upper_triangular(),
        "T is upper triangular",
    );

    if n <= BRUTE_FORCE_VERIFY_MAX_N {
        suite.push(
            "oracle.brute_force",
            brute_force_position_matrix(n)? == m,
            format!("all 2^{n} outcomes enumerated"),
        );
    }

    let system = match system {
        Some(s) => s,
        None => EigenSystem::compute(n)?,
    };
    let same_deck = system.n == n;
    suite.push(
        "spectral.deck_size",
        same_deck,
        format!("system built for n = {}", system.n),
    );
    if !same_deck {
        return Ok(finish(n, suite));
    }
    match system.check() {
        Ok(checks) => {
            for (name, ok) in checks.named() {
                suite.push(&format!("spectral.{name}"), ok, "exact");
            }
        }
        Err(e) => suite.push("spectral.shape", false, e.to_string()),
    }

    let mut power = m.clone();
    let mut powers_ok = true;
    for k in 1..=POWER_CHECK_MAX_K {
        if k > 1 {
            power = power.mul(&m)?;
        }
        powers_ok &= spectral_power_of(&system, k)? == power;
    }
    suite.push(
        "spectral.power",
        powers_ok,
        format!("spectral sum equals repeated product for k = 1..={POWER_CHECK_MAX_K}"),
    );

    if n >= 3 {
        suite.push(
            "spectral.quarter_mode_witness",
            quarter_mode_matches_witness(n)?,
            "zeta_2 = (2/3) v, v(k) = n^2 - 3nk + (3/2)k(k+1) - 1",
        );
    }

    let norms = linf_norms_of(&system)?;
    suite.push(
        "bounds.right_linf",
        norms.iter().all(|r| r.right_ok),
        "|zeta_i|_inf <= 4 i! n^i",
    );
    suite.push(
        "bounds.left_linf",
        norms.iter().all(|r| r.left_ok),
        "|zeta~_i|_inf <= 2^i / (i! (n - i))",
    );

    let a_ok = (2..n)
        .step_by(2)
        .all(|i| a_constant(i) <= integer(4) * integer(factorial(i as u64)));
    suite.push("bounds.a_constant", a_ok, "A_i <= 4 i! for even i < n");

    let residual_ok = (1..=n).all(|k| bernoulli_identity_residual(k).is_zero());
    suite.push(
        "bernoulli.identity",
        residual_ok,
        format!("residual is zero for 1..={n}"),
    );

    let envelope = envelope_check(n, DEFAULT_SLACK, ENVELOPE_UPPER_FROM, &PmfTable::new(n))?;
    suite.push(
        "guessing.envelope",
        envelope.passed(),
        format!(
            "lower {:?}, dominance {:?}, upper {}",
            envelope.lower_ok,
            envelope.dominance_ok,
            envelope.upper_ok.map_or_else(
                || format!("not asserted below n = {ENVELOPE_UPPER_FROM}"),
                |v| format!("{v:?}")
            )
        ),
    );

    Ok(finish(n, suite))
}

fn finish(n: usize, suite: Suite) -> VerifyReport {
    let passed = suite.0.iter().all(|c| c.passed);
    VerifyReport {
        n,
        passed,
        checks: suite.0,
    }
}
