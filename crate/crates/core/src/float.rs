//! Floating-point position matrices with rigorous error bounds.
//!
//! Row `i` of `M` is built from the `Bin(i-1, 1/2)` mass function, which the
//! Pascal recurrence `p'(r) = (p(r) + p(r-1)) / 2` produces using only
//! additions of nonnegative numbers and exact halvings. Each step adds at most
//! one rounding of relative size `u = 2^-53`, so row `i` carries a relative
//! error of at most `(i + 1) u` before any underflow. Underflowed entries are
//! covered by an absolute floor.

/// Unit roundoff of `f64`.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Absolute error allowance per entry for values lost to underflow.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// `gamma_m = m u / (1 - m u)`, the classic bound for an `m`-term sum.
pub fn gamma(m: usize) -> f64 {
    let mu = m as f64 * UNIT_ROUNDOFF;
    mu / (1.0 - mu)
}

/// Relative error bound of a computed entry in row `i` (1-based) of `M`.
pub fn entry_relative_bound(i: usize) -> f64 {
    1.01 * (i as f64 + 1.0) * UNIT_ROUNDOFF
}

/// Binomial(i-1, 1/2) mass functions for `i = 1..=max_rows`.
#[derive(Debug, Clone)]
pub struct PmfTable {
    rows: Vec<Vec<f64>>,
}

impl PmfTable {
    pub fn new(max_rows: usize) -> Self {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(max_rows);
        if max_rows > 0 {
            rows.push(vec![1.0]);
        }
        while rows.len() < max_rows {
            let prev = rows.last().expect("nonempty");
            let mut next = Vec::with_capacity(prev.len() + 1);
            next.push(prev[0] * 0.5);
            for r in 1..prev.len() {
                next.push((prev[r] + prev[r - 1]) * 0.5);
            }
            next.push(prev[prev.len() - 1] * 0.5);
            rows.push(next);
        }
        Self { rows }
    }

    pub fn max_rows(&self) -> usize {
        self.rows.len()
    }

    /// Mass function of `Bin(i-1, 1/2)`, indexed by `0..i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i - 1]
    }

    /// `M(i, j)` for an `n`-card deck, 1-based.
    pub fn entry(&self, n: usize, i: usize, j: usize) -> f64 {
        let p = self.row(i);
        let a = p.get(j - 1).copied().unwrap_or(0.0);
        let b = p.get(n - j).copied().unwrap_or(0.0);
        (a + b) * 0.5
    }

    /// Absolute error bound for [`PmfTable::entry`].
    pub fn entry_bound(&self, i: usize, value: f64) -> f64 {
        entry_relative_bound(i) * value + UNDERFLOW_FLOOR
    }

    /// Smallest `r` with `p(r) >= threshold`, or `None` if the whole row is
    /// below it. The row is symmetric and unimodal, so the retained set is
    /// `lo..=(i-1-lo)`.
    fn lower_cut(&self, i: usize, threshold: f64) -> Option<usize> {
        let p = self.row(i);
        let mode = (i - 1) / 2;
        if p[mode] < threshold {
            return None;
        }
        let (mut lo, mut hi) = (0usize, mode);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if p[mid] >= threshold {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }

    /// Dense float `M` for `n <= max_rows`.
    pub fn position_matrix(&self, n: usize) -> FloatMatrix {
        let mut values = vec![0.0; n * n];
        for i in 1..=n {
            for j in 1..=n {
                values[(i - 1) * n + j - 1] = self.entry(n, i, j);
            }
        }
        FloatMatrix {
            n,
            values,
            relative: entry_relative_bound(n),
            floor: UNDERFLOW_FLOOR,
        }
    }

    /// Column-wise best and runner-up of `M` for an `n`-card deck.
    ///
    /// Entries below `1/(2n)` are skipped without being formed: every column
    /// of `M` sums to 1, so its maximum is at least `1/n`.
    pub fn column_leaders(&self, n: usize) -> Vec<ColumnLeader> {
        assert!(n <= self.max_rows(), "pmf table too small for n = {n}");
        let threshold = 0.5 / n as f64;
        let mut leaders = vec![ColumnLeader::default(); n];
        for i in 1..=n {
            let Some(lo) = self.lower_cut(i, threshold) else {
                continue;
            };
            let hi = i - 1 - lo;
            // j - 1 in [lo, hi]  or  n - j in [lo, hi]
            let first = (lo + 1, hi + 1);
            let second = (n.saturating_sub(hi).max(1), n - lo);
            let first = (first.0, first.1.min(n));
            let spans: Vec<(usize, usize)> = if first.0 > first.1 {
                vec![second]
            } else if second.0 <= first.1 + 1 && first.0 <= second.1 + 1 {
                vec![(first.0.min(second.0), first.1.max(second.1))]
            } else {
                vec![first, second]
            };
            for (start, end) in spans {
                for j in start..=end {
                    let value = self.entry(n, i, j);
                    leaders[j - 1].offer(i, value, self.entry_bound(i, value));
                }
            }
        }
        leaders
    }
}

/// Best entry of one column, tie broken toward the smallest label.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ColumnLeader {
    pub label: usize,
    pub value: f64,
    pub bound: f64,
    pub runner_up: f64,
    pub runner_up_bound: f64,
}

impl ColumnLeader {
    /// Offers `value` for card `label`; labels must arrive in increasing order.
    pub fn offer(&mut self, label: usize, value: f64, bound: f64) {
        if self.label == 0 || value > self.value {
            if self.label != 0 {
                self.runner_up = self.value;
                self.runner_up_bound = self.bound;
            }
            self.label = label;
            self.value = value;
            self.bound = bound;
        } else if value > self.runner_up {
            self.runner_up = value;
            self.runner_up_bound = bound;
        }
    }

    /// True when the computed top two cannot be ordered within their bounds.
    pub fn ambiguous(&self) -> bool {
        self.runner_up > 0.0 && self.value - self.runner_up <= self.bound + self.runner_up_bound
    }
}

/// Dense nonnegative float matrix with a uniform relative error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatMatrix {
    pub n: usize,
    pub values: Vec<f64>,
    /// Entrywise relative error bound with respect to the exact matrix.
    pub relative: f64,
    /// Entrywise absolute allowance for underflow.
    pub floor: f64,
}

impl FloatMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i - 1) * self.n + j - 1]
    }

    /// Absolute error bound for a computed entry `value`.
    pub fn bound(&self, value: f64) -> f64 {
        self.relative / (1.0 - self.relative) * value + self.floor
    }

    /// Product of two nonnegative matrices; relative errors compose as
    /// `(1 + a)(1 + b)(1 + gamma_n) - 1`.
    pub fn mul(&self, other: &FloatMatrix) -> FloatMatrix {
        let n = self.n;
        let mut values = vec![0.0; n * n];
        for r in 0..n {
            let out = &mut values[r * n..(r + 1) * n];
            for k in 0..n {
                let a = self.values[r * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.values[k * n..(k + 1) * n];
                for (slot, b) in out.iter_mut().zip(row) {
                    *slot += a * b;
                }
            }
        }
        FloatMatrix {
            n,
            values,
            relative: (1.0 + self.relative) * (1.0 + other.relative) * (1.0 + gamma(n + 1)) - 1.0,
            floor: (n as f64) * (self.floor + other.floor) + UNDERFLOW_FLOOR,
        }
    }

    pub fn pow(&self, k: usize) -> FloatMatrix {
        assert!(k >= 1);
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Column leaders scanning every entry.
    pub fn column_leaders(&self) -> Vec<ColumnLeader> {
        let n = self.n;
        let mut leaders = vec![ColumnLeader::default(); n];
        for i in 1..=n {
            for (j, leader) in leaders.iter_mut().enumerate() {
                let value = self.get(i, j + 1);
                leader.offer(i, value, self.bound(value));
            }
        }
        leaders
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::position_entry;
    use num_traits::ToPrimitive;

    #[test]
    fn pmf_rows_sum_to_one() {
        let table = PmfTable::new(200);
        for i in 1..=200 {
            let s: f64 = table.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "i={i}");
        }
    }

    #[test]
    fn entries_within_bound_of_exact() {
        let table = PmfTable::new(80);
        for n in [2, 3, 17, 64, 80] {
            for i in 1..=n {
                for j in 1..=n {
                    let exact = position_entry(n, i, j).to_f64().unwrap();
                    let got = table.entry(n, i, j);
                    assert!(
                        (exact - got).abs() <= table.entry_bound(i, got),
                        "n={n} i={i} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn pruned_scan_matches_full_scan() {
        let table = PmfTable::new(300);
        for n in (2..=300).step_by(7) {
            let pruned = table.column_leaders(n);
            let full = table.position_matrix(n).column_leaders();
            for (j, (a, b)) in pruned.iter().zip(&full).enumerate() {
                assert_eq!(a.label, b.label, "n={n} column {}", j + 1);
                assert_eq!(a.value, b.value);
            }
        }
    }

    #[test]
    fn power_bound_covers_exact() {
        let table = PmfTable::new(12);
        let m = table.position_matrix(12);
        let cube = m.pow(3);
        let exact = crate::spectral::spectral_power(12, 3).unwrap();
        for i in 1..=12 {
            for j in 1..=12 {
                let e = exact.get(i - 1, j - 1).to_f64().unwrap();
                let v = cube.get(i, j);
                assert!((e - v).abs() <= cube.bound(v));
            }
        }
    }

    #[test]
    fn leader_ties_prefer_smaller_label() {
        let mut leader = ColumnLeader::default();
        leader.offer(2, 0.25, 0.0);
        leader.offer(3, 0.25, 0.0);
        assert_eq!(leader.label, 2);
        assert!(leader.ambiguous());
        leader.offer(4, 0.5, 0.0);
        assert_eq!(leader.label, 4);
        assert!(!leader.ambiguous());
    }
}
