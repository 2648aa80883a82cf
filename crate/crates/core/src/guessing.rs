//! No-feedback card guessing after `k` single-shelf shuffles.
//!
//! A strategy fixes one guess per deck position before any card is seen, so
//! its expected score is `sum_j M^k(g_j, j)`. The best achievable score,
//! `E_{n,k}`, is the sum of the column maxima of `M^k`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_deck, Error, Result};
use crate::float::{gamma, FloatMatrix, PmfTable, UNIT_ROUNDOFF};
use crate::matrices::{position_entry, position_matrix, RationalMatrix};
use crate::numerics::{rational, rational_str, Rational};
use crate::spectral::spectral_power;

/// Largest deck for which the exact backend is chosen automatically.
pub const EXACT_AUTO_LIMIT: usize = 64;

/// Default constant `c` in the `c / sqrt(n)` slack of the upper envelope.
pub const DEFAULT_SLACK: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

impl Backend {
    pub fn auto(n: usize) -> Self {
        if n <= EXACT_AUTO_LIMIT {
            Backend::Exact
        } else {
            Backend::Float
        }
    }
}

/// One guessed card label per deck position, both 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub n: usize,
    pub guesses: Vec<usize>,
}

impl Strategy {
    pub fn new(n: usize, guesses: Vec<usize>) -> Result<Self> {
        check_deck(n)?;
        if guesses.len() != n {
            return Err(Error::InvalidStrategy(format!(
                "expected {n} guesses, got {}",
                guesses.len()
            )));
        }
        if let Some((j, g)) = guesses.iter().enumerate().find(|(_, &g)| g == 0 || g > n) {
            return Err(Error::InvalidStrategy(format!(
                "position {} guesses card {g}, outside 1..={n}",
                j + 1
            )));
        }
        Ok(Self { n, guesses })
    }

    /// Guess card `card` at every position.
    pub fn constant(n: usize, card: usize) -> Result<Self> {
        Self::new(n, vec![card; n])
    }

    /// Guess at 1-based position `j`.
    pub fn guess(&self, j: usize) -> usize {
        self.guesses[j - 1]
    }
}

/// Guess card `2j - 1` at positions `j` and `n - j + 1`.
pub fn strategy_g(n: usize) -> Result<Strategy> {
    check_deck(n)?;
    let mut guesses = vec![0; n];
    for j in 1..=n.div_ceil(2) {
        guesses[j - 1] = 2 * j - 1;
        guesses[n - j] = 2 * j - 1;
    }
    Strategy::new(n, guesses)
}

/// Lower and upper one-shuffle envelopes `sqrt(2n/pi) - 1` and
/// `sqrt(2n/pi) + 1 + slack / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
    pub slack: f64,
    /// Absolute error bound on both computed envelope values.
    pub error_bound: f64,
}

pub fn theorem_b_envelope(n: usize, slack: f64) -> Envelope {
    let nf = n as f64;
    let root = (2.0 * nf / std::f64::consts::PI).sqrt();
    let upper = root + 1.0 + slack / nf.sqrt();
    Envelope {
        lower: root - 1.0,
        upper,
        slack,
        error_bound: 16.0 * UNIT_ROUNDOFF * (upper.abs() + 1.0),
    }
}

/// Per-position contribution to a score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionScore {
    pub position: usize,
    pub guess: usize,
    #[serde(with = "rational_str::option")]
    pub exact: Option<Rational>,
    pub value: f64,
    pub error_bound: f64,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub n: usize,
    pub k: usize,
    pub backend: Backend,
    #[serde(with = "rational_str::option")]
    pub exact_score: Option<Rational>,
    pub float_score: f64,
    pub error_bound: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub slack: f64,
    /// Columns whose computed top two entries cannot be separated.
    pub ambiguous_columns: Vec<usize>,
    pub positions: Vec<PositionScore>,
}

fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn exact_power(n: usize, k: usize) -> Result<RationalMatrix> {
    if k == 0 {
        return Err(Error::ZeroPower);
    }
    if k == 1 {
        position_matrix(n)
    } else {
        spectral_power(n, k)
    }
}

fn float_power(n: usize, k: usize) -> Result<FloatMatrix> {
    if k == 0 {
        return Err(Error::ZeroPower);
    }
    Ok(PmfTable::new(n).position_matrix(n).pow(k))
}

fn report(
    n: usize,
    k: usize,
    backend: Backend,
    slack: f64,
    positions: Vec<PositionScore>,
) -> ScoreReport {
    let envelope = theorem_b_envelope(n, slack);
    let (exact_score, float_score, error_bound) = match backend {
        Backend::Exact => {
            let total: Rational = positions.iter().filter_map(|p| p.exact.clone()).sum();
            let value = to_f64(&total);
            (Some(total), value, 0.0)
        }
        Backend::Float => {
            let value: f64 = positions.iter().map(|p| p.value).sum();
            let bound: f64 =
                positions.iter().map(|p| p.error_bound).sum::<f64>() + gamma(n) * value;
            (None, value, bound)
        }
    };
    ScoreReport {
        n,
        k,
        backend,
        exact_score,
        float_score,
        error_bound,
        lower_bound: envelope.lower,
        upper_bound: envelope.upper,
        slack,
        ambiguous_columns: positions
            .iter()
            .filter(|p| p.ambiguous)
            .map(|p| p.position)
            .collect(),
        positions,
    }
}

fn exact_position(position: usize, guess: usize, value: Rational) -> PositionScore {
    PositionScore {
        position,
        guess,
        value: to_f64(&value),
        exact: Some(value),
        error_bound: 0.0,
        ambiguous: false,
    }
}

/// Column-argmax strategy and its score `E_{n,k}`; ties go to the smallest
/// card label.
pub fn optimal_no_feedback(
    n: usize,
    k: usize,
    backend: Backend,
    slack: f64,
) -> Result<(Strategy, ScoreReport)> {
    check_deck(n)?;
    let positions: Vec<PositionScore> = match backend {
        Backend::Exact => {
            let power = exact_power(n, k)?;
            (0..n)
                .map(|c| {
                    let mut best = 0;
                    for r in 1..n {
                        if power.get(r, c) > power.get(best, c) {
                            best = r;
                        }
                    }
                    exact_position(c + 1, best + 1, power.get(best, c).clone())
                })
                .collect()
        }
        Backend::Float => {
            if k == 0 {
                return Err(Error::ZeroPower);
            }
            let leaders = if k == 1 {
                PmfTable::new(n).column_leaders(n)
            } else {
                float_power(n, k)?.column_leaders()
            };
            leaders
                .iter()
                .enumerate()
                .map(|(c, leader)| PositionScore {
                    position: c + 1,
                    guess: leader.label,
                    exact: None,
                    value: leader.value,
                    error_bound: leader.bound,
                    ambiguous: leader.ambiguous(),
                })
                .collect()
        }
    };
    let strategy = Strategy::new(n, positions.iter().map(|p| p.guess).collect())?;
    Ok((strategy, report(n, k, backend, slack, positions)))
}

/// Expected score `sum_j M^k(g_j, j)` of a fixed strategy.
pub fn strategy_score(
    n: usize,
    k: usize,
    strategy: &Strategy,
    backend: Backend,
    slack: f64,
) -> Result<ScoreReport> {
    check_deck(n)?;
    if strategy.n != n {
        return Err(Error::InvalidStrategy(format!(
            "strategy is for {} cards, deck has {n}",
            strategy.n
        )));
    }
    if k == 0 {
        return Err(Error::ZeroPower);
    }
    let positions: Vec<PositionScore> = match backend {
        Backend::Exact if k == 1 => (1..=n)
            .map(|j| {
                exact_position(
                    j,
                    strategy.guess(j),
                    position_entry(n, strategy.guess(j), j),
                )
            })
            .collect(),
        Backend::Exact => {
            let power = exact_power(n, k)?;
            (1..=n)
                .map(|j| {
                    let g = strategy.guess(j);
                    exact_position(j, g, power.get(g - 1, j - 1).clone())
                })
                .collect()
        }
        Backend::Float => {
            let table = PmfTable::new(n);
            let power = (k > 1).then(|| table.position_matrix(n).pow(k));
            (1..=n)
                .map(|j| {
                    let g = strategy.guess(j);
                    let (value, error_bound) = match &power {
                        Some(p) => (p.get(g, j), p.bound(p.get(g, j))),
                        None => {
                            let v = table.entry(n, g, j);
                            (v, table.entry_bound(g, v))
                        }
                    };
                    PositionScore {
                        position: j,
                        guess: g,
                        exact: None,
                        value,
                        error_bound,
                        ambiguous: false,
                    }
                })
                .collect()
        }
    };
    Ok(report(n, k, backend, slack, positions))
}

/// `E_{n,1}` in exact arithmetic from scaled integer entries
/// `2^{n-i} (C(i-1, j-1) + C(i-1, n-j))`.
pub fn exact_optimal_one_shuffle(n: usize) -> Result<Rational> {
    check_deck(n)?;
    let mut best = vec![BigInt::zero(); n];
    let mut row: Vec<BigInt> = vec![BigInt::one()];
    for i in 1..=n {
        for (j, slot) in best.iter_mut().enumerate() {
            let j = j + 1;
            let a = row.get(j - 1).cloned().unwrap_or_default();
            let b = row.get(n - j).cloned().unwrap_or_default();
            let value = (a + b) << (n - i);
            if value > *slot {
                *slot = value;
            }
        }
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(BigInt::one());
        for r in 1..row.len() {
            next.push(&row[r - 1] + &row[r]);
        }
        next.push(BigInt::one());
        row = next;
    }
    let total: BigInt = best.into_iter().sum();
    Ok(Rational::new(total, BigInt::one() << n))
}

/// Exact one-shuffle score of strategy G.
pub fn exact_g_score(n: usize) -> Result<Rational> {
    let g = strategy_g(n)?;
    Ok((1..=n).map(|j| position_entry(n, g.guess(j), j)).sum())
}

/// Three-way outcome of an inequality check under bounded error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    Undecided,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

/// Decides `lhs <= rhs` for values known to within `lhs_err` and `rhs_err`.
pub fn decide_le(lhs: f64, lhs_err: f64, rhs: f64, rhs_err: f64) -> Verdict {
    if lhs + lhs_err <= rhs - rhs_err {
        Verdict::Holds
    } else if lhs - lhs_err > rhs + rhs_err {
        Verdict::Violated
    } else {
        Verdict::Undecided
    }
}

fn interval(t: f64, err: f64) -> (Rational, Rational) {
    let lo = Rational::from_float(t - err).expect("finite");
    let hi = Rational::from_float(t + err).expect("finite");
    (lo, hi)
}

/// Decides `q <= t` for exact `q` and `t` known to within `err`.
pub fn decide_exact_le(q: &Rational, t: f64, err: f64) -> Verdict {
    let (lo, hi) = interval(t, err);
    if *q <= lo {
        Verdict::Holds
    } else if *q > hi {
        Verdict::Violated
    } else {
        Verdict::Undecided
    }
}

/// Decides `t <= q` for exact `q` and `t` known to within `err`.
pub fn decide_exact_ge(q: &Rational, t: f64, err: f64) -> Verdict {
    let (lo, hi) = interval(t, err);
    if *q >= hi {
        Verdict::Holds
    } else if *q < lo {
        Verdict::Violated
    } else {
        Verdict::Undecided
    }
}

/// One row of the one-shuffle envelope table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeCheck {
    pub n: usize,
    pub backend: Backend,
    pub escalated: bool,
    pub g_score: f64,
    pub g_error: f64,
    pub optimal_score: f64,
    pub optimal_error: f64,
    pub lower: f64,
    pub upper: f64,
    /// `sqrt(2n/pi) - 1 <= E[S_n(G)]`.
    pub lower_ok: Verdict,
    /// `E[S_n(G)] <= E_{n,1}`.
    pub dominance_ok: Verdict,
    /// `E_{n,1} <= upper`; only evaluated from `upper_from` on.
    pub upper_ok: Option<Verdict>,
}

impl EnvelopeCheck {
    pub fn passed(&self) -> bool {
        self.lower_ok.holds()
            && self.dominance_ok.holds()
            && self.upper_ok.is_none_or(Verdict::holds)
    }
}

/// Checks the one-shuffle envelope for one `n`.
///
/// Decks up to [`EXACT_AUTO_LIMIT`] are evaluated exactly. Larger decks use
/// `table` (which must hold at least `n` rows); any comparison the float
/// error bounds cannot settle is recomputed in exact arithmetic.
pub fn envelope_check(
    n: usize,
    slack: f64,
    upper_from: usize,
    table: &PmfTable,
) -> Result<EnvelopeCheck> {
    check_deck(n)?;
    let env = theorem_b_envelope(n, slack);
    let check_upper = n >= upper_from;
    if n <= EXACT_AUTO_LIMIT {
        let g = exact_g_score(n)?;
        let opt = exact_optimal_one_shuffle(n)?;
        return Ok(EnvelopeCheck {
            n,
            backend: Backend::Exact,
            escalated: false,
            g_score: to_f64(&g),
            g_error: 0.0,
            optimal_score: to_f64(&opt),
            optimal_error: 0.0,
            lower: env.lower,
            upper: env.upper,
            lower_ok: decide_exact_ge(&g, env.lower, env.error_bound),
            dominance_ok: if g <= opt {
                Verdict::Holds
            } else {
                Verdict::Violated
            },
            upper_ok: check_upper.then(|| decide_exact_le(&opt, env.upper, env.error_bound)),
        });
    }

    let strategy = strategy_g(n)?;
    let (mut g_score, mut g_error) = (0.0, 0.0);
    for j in 1..=n {
        let i = strategy.guess(j);
        let v = table.entry(n, i, j);
        g_score += v;
        g_error += table.entry_bound(i, v);
    }
    g_error += gamma(n) * g_score;
    let leaders = table.column_leaders(n);
    let optimal_score: f64 = leaders.iter().map(|l| l.value).sum();
    let optimal_error = leaders.iter().map(|l| l.bound).sum::<f64>() + gamma(n) * optimal_score;

    let mut escalated = false;
    let mut exact_g: Option<Rational> = None;
    let mut exact_opt: Option<Rational> = None;

    let mut lower_ok = decide_le(env.lower, env.error_bound, g_score, g_error);
    if lower_ok == Verdict::Undecided {
        escalated = true;
        let g = exact_g.get_or_insert(exact_g_score(n)?);
        lower_ok = decide_exact_ge(g, env.lower, env.error_bound);
    }
    let mut dominance_ok = decide_le(g_score, g_error, optimal_score, optimal_error);
    if dominance_ok == Verdict::Undecided {
        escalated = true;
        if exact_g.is_none() {
            exact_g = Some(exact_g_score(n)?);
        }
        let opt = exact_opt.get_or_insert(exact_optimal_one_shuffle(n)?);
        dominance_ok = if exact_g.as_ref().expect("set") <= opt {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
    }
    let upper_ok = if check_upper {
        let mut verdict = decide_le(optimal_score, optimal_error, env.upper, env.error_bound);
        if verdict == Verdict::Undecided {
            escalated = true;
            if exact_opt.is_none() {
                exact_opt = Some(exact_optimal_one_shuffle(n)?);
            }
            verdict = decide_exact_le(exact_opt.as_ref().expect("set"), env.upper, env.error_bound);
        }
        Some(verdict)
    } else {
        None
    };

    Ok(EnvelopeCheck {
        n,
        backend: Backend::Float,
        escalated,
        g_score,
        g_error,
        optimal_score,
        optimal_error,
        lower: env.lower,
        upper: env.upper,
        lower_ok,
        dominance_ok,
        upper_ok,
    })
}

/// Distance of `E_{n,k}` from 1 after `k = ceil((1 + eps) log2 n)` shuffles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub n: usize,
    pub epsilon: f64,
    pub k: usize,
    /// The shuffle count if the logarithm is read as natural; reported only.
    pub k_natural_log: usize,
    #[serde(with = "rational_str")]
    pub score: Rational,
    #[serde(with = "rational_str")]
    pub deviation: Rational,
    pub deviation_f64: f64,
    /// `n^{-2 eps}`.
    pub reference: f64,
    /// `|E_{n,k} - 1| n^{2 eps}`.
    pub scaled: f64,
}

fn ceil_with_tolerance(x: f64) -> usize {
    ((x - 1e-9).ceil().max(1.0)) as usize
}

/// Shuffle count `ceil((1 + eps) log2 n)`, at least 1.
pub fn decay_rounds(n: usize, epsilon: f64) -> usize {
    ceil_with_tolerance((1.0 + epsilon) * (n as f64).log2())
}

pub fn ciucu_decay(n: usize, epsilon: f64) -> Result<DecayReport> {
    check_deck(n)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let k = decay_rounds(n, epsilon);
    let (_, report) = optimal_no_feedback(n, k, Backend::Exact, DEFAULT_SLACK)?;
    let score = report.exact_score.expect("exact backend");
    let deviation = (&score - Rational::one()).abs();
    let deviation_f64 = to_f64(&deviation);
    let scale = (n as f64).powf(2.0 * epsilon);
    Ok(DecayReport {
        n,
        epsilon,
        k,
        k_natural_log: ceil_with_tolerance((1.0 + epsilon) * (n as f64).ln()),
        score,
        deviation,
        deviation_f64,
        reference: 1.0 / scale,
        scaled: deviation_f64 * scale,
    })
}

/// The `n = 24`, column 10 comparison showing card 19 is not the best guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub position: usize,
    #[serde(with = "rational_str")]
    pub entry_19: Rational,
    #[serde(with = "rational_str")]
    pub entry_20: Rational,
    #[serde(with = "rational_str")]
    pub below: Rational,
    #[serde(with = "rational_str")]
    pub above: Rational,
    /// `entry_19 < below < above < entry_20`, read literally.
    pub chain_holds: bool,
    /// `entry_19 < entry_20`: card 19 is not a best guess at position 10.
    pub card_19_beaten: bool,
    pub column_argmax: usize,
    #[serde(with = "rational_str")]
    pub column_max: Rational,
    #[serde(with = "rational_str::vec")]
    pub column: Vec<Rational>,
}

pub fn clay_counterexample() -> CounterexampleReport {
    let (n, position) = (24, 10);
    let column: Vec<Rational> = (1..=n).map(|i| position_entry(n, i, position)).collect();
    let mut argmax = 0;
    for (idx, v) in column.iter().enumerate() {
        if *v > column[argmax] {
            argmax = idx;
        }
    }
    let entry_19 = column[18].clone();
    let entry_20 = column[19].clone();
    let below = rational(98, 1000);
    let above = rational(99, 1000);
    CounterexampleReport {
        n,
        position,
        chain_holds: entry_19 < below && below < above && above < entry_20,
        card_19_beaten: entry_19 < entry_20,
        entry_19,
        entry_20,
        below,
        above,
        column_argmax: argmax + 1,
        column_max: column[argmax].clone(),
        column,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integer;

    #[test]
    fn strategy_g_shapes() {
        assert_eq!(strategy_g(4).unwrap().guesses, vec![1, 3, 3, 1]);
        assert_eq!(strategy_g(5).unwrap().guesses, vec![1, 3, 5, 3, 1]);
        assert_eq!(strategy_g(3).unwrap().guesses, vec![1, 3, 1]);
        assert_eq!(strategy_g(2).unwrap().guesses, vec![1, 1]);
    }

    #[test]
    fn strategy_validation() {
        assert!(Strategy::new(3, vec![1, 2]).is_err());
        assert!(Strategy::new(3, vec![1, 4, 1]).is_err());
        assert!(Strategy::new(3, vec![0, 1, 1]).is_err());
        assert!(Strategy::new(3, vec![2, 2, 2]).is_ok());
    }

    #[test]
    fn optimal_scores_small() {
        let (s, r) = optimal_no_feedback(3, 1, Backend::Exact, DEFAULT_SLACK).unwrap();
        assert_eq!(r.exact_score, Some(rational(3, 2)));
        assert_eq!(s.guesses, vec![1, 2, 1]);
        let (_, r) = optimal_no_feedback(4, 1, Backend::Exact, DEFAULT_SLACK).unwrap();
        assert_eq!(r.exact_score, Some(rational(7, 4)));
        let maxima: Vec<Rational> = r
            .positions
            .iter()
            .map(|p| p.exact.clone().unwrap())
            .collect();
        assert_eq!(
            maxima,
            vec![
                rational(1, 2),
                rational(3, 8),
                rational(3, 8),
                rational(1, 2)
            ]
        );
        let (_, r) = optimal_no_feedback(3, 2, Backend::Exact, DEFAULT_SLACK).unwrap();
        assert_eq!(r.exact_score, Some(rational(9, 8)));
        assert!(optimal_no_feedback(3, 0, Backend::Exact, DEFAULT_SLACK).is_err());
    }

    #[test]
    fn fixed_strategy_scores() {
        let g4 = strategy_g(4).unwrap();
        let r = strategy_score(4, 1, &g4, Backend::Exact, DEFAULT_SLACK).unwrap();
        assert_eq!(r.exact_score, Some(rational(7, 4)));
        let g3 = strategy_g(3).unwrap();
        let r = strategy_score(3, 1, &g3, Backend::Exact, DEFAULT_SLACK).unwrap();
        assert_eq!(r.exact_score, Some(rational(3, 2)));
        for n in 2..=20 {
            let c = Strategy::constant(n, 1).unwrap();
            let r = strategy_score(n, 1, &c, Backend::Exact, DEFAULT_SLACK).unwrap();
            assert_eq!(r.exact_score, Some(integer(1)));
        }
    }

    #[test]
    fn exact_float_field_is_rounded_exact() {
        let (_, r) = optimal_no_feedback(9, 2, Backend::Exact, DEFAULT_SLACK).unwrap();
        assert_eq!(r.float_score, r.exact_score.unwrap().to_f64().unwrap());
    }

    #[test]
    fn float_backend_agrees_with_exact() {
        for n in 2..=64 {
            let (es, er) = optimal_no_feedback(n, 1, Backend::Exact, DEFAULT_SLACK).unwrap();
            let (fs, fr) = optimal_no_feedback(n, 1, Backend::Float, DEFAULT_SLACK).unwrap();
            assert!((er.float_score - fr.float_score).abs() <= 1e-9, "n={n}");
            assert!((er.float_score - fr.float_score).abs() <= fr.error_bound);
            if fr.ambiguous_columns.is_empty() {
                assert_eq!(es, fs, "n={n}");
            }
        }
        for n in [5, 11] {
            let (_, er) = optimal_no_feedback(n, 3, Backend::Exact, DEFAULT_SLACK).unwrap();
            let (_, fr) = optimal_no_feedback(n, 3, Backend::Float, DEFAULT_SLACK).unwrap();
            assert!((er.float_score - fr.float_score).abs() <= fr.error_bound.max(1e-15));
        }
    }

    #[test]
    fn exact_one_shuffle_matches_matrix_scan() {
        for n in 2..=30 {
            let (_, r) = optimal_no_feedback(n, 1, Backend::Exact, DEFAULT_SLACK).unwrap();
            assert_eq!(
                exact_optimal_one_shuffle(n).unwrap(),
                r.exact_score.unwrap()
            );
            let g = strategy_score(n, 1, &strategy_g(n).unwrap(), Backend::Exact, DEFAULT_SLACK)
                .unwrap();
            assert_eq!(exact_g_score(n).unwrap(), g.exact_score.unwrap());
        }
    }

    #[test]
    fn envelope_values() {
        let e = theorem_b_envelope(4, DEFAULT_SLACK);
        assert!((e.lower - 0.595_769).abs() < 1e-5);
        assert!((theorem_b_envelope(100, DEFAULT_SLACK).lower - 6.978_845).abs() < 1e-5);
        assert!((theorem_b_envelope(2, DEFAULT_SLACK).lower - 0.128_379).abs() < 1e-5);
    }

    #[test]
    fn g_never_beats_optimal() {
        let table = PmfTable::new(512);
        for n in 2..=512 {
            let check = envelope_check(n, DEFAULT_SLACK, 16, &table).unwrap();
            assert!(check.dominance_ok.holds(), "n={n}");
            assert!(check.lower_ok.holds(), "n={n}");
        }
    }

    #[test]
    fn decay_small() {
        let report = ciucu_decay(3, 0.2).unwrap();
        assert_eq!(report.k, 2);
        assert_eq!(report.deviation, rational(1, 8));
        assert!(ciucu_decay(3, 0.0).is_err());
        for n in 2..=12 {
            for k in 1..=4 {
                let (_, r) = optimal_no_feedback(n, k, Backend::Exact, DEFAULT_SLACK).unwrap();
                let e = r.exact_score.unwrap();
                assert!(e >= integer(1) && e <= integer(n as i64));
            }
        }
    }

    #[test]
    fn counterexample() {
        let r = clay_counterexample();
        assert_eq!(r.entry_19, rational(1615, 16384));
        assert_eq!(r.entry_20, rational(52003, 524288));
        assert!(r.card_19_beaten);
        assert_eq!(r.column_argmax, 20);
        assert_ne!(r.column_argmax, 19);
        // 1615/16384 = 0.098572..., so the 0.098 separator sits below it.
        assert!(r.entry_19 > r.below);
        assert!(r.above < r.entry_20);
        assert!(!r.chain_holds);
    }

    #[test]
    fn verdicts() {
        assert_eq!(decide_le(1.0, 0.1, 2.0, 0.1), Verdict::Holds);
        assert_eq!(decide_le(2.0, 0.1, 1.0, 0.1), Verdict::Violated);
        assert_eq!(decide_le(1.0, 0.1, 1.1, 0.1), Verdict::Undecided);
        assert_eq!(decide_exact_le(&rational(1, 2), 0.75, 1e-9), Verdict::Holds);
        assert_eq!(
            decide_exact_ge(&rational(1, 2), 0.5, 1e-9),
            Verdict::Undecided
        );
    }
}
