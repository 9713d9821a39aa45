//! Two-sided Wilcoxon signed-rank test for paired samples.
//!
//! Zero differences are dropped before ranking; ties in |difference| receive
//! average ranks. Up to 25 effective pairs the p-value comes from the exact
//! null distribution (every sign assignment, tabulated by dynamic
//! programming over doubled ranks, which are integers even with average
//! ranks). Beyond that a normal approximation with continuity correction and
//! tie-corrected variance is used.

use statrs::distribution::{ContinuousCDF, Normal};

use super::StatsError;

const EXACT_LIMIT: usize = 25;
const MIN_PAIRS: usize = 5;

pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| d.abs() > 1e-12)
        .collect();
    if diffs.is_empty() {
        // all pairs tied: the null hypothesis holds trivially
        return Ok(1.0);
    }
    let n = diffs.len();
    if n < MIN_PAIRS {
        return Err(StatsError::InsufficientPairs { needed: MIN_PAIRS, got: n });
    }

    let ranks = average_ranks(&diffs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();

    if n <= EXACT_LIMIT {
        Ok(exact_p(&ranks, w_plus))
    } else {
        Ok(normal_p(&ranks, w_plus))
    }
}

/// Average ranks of |diffs|, 1-based.
fn average_ranks(diffs: &[f64]) -> Vec<f64> {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0.0; n];
    let mut pos = 0;
    while pos < n {
        let mut end = pos + 1;
        while end < n && diffs[order[end]].abs() == diffs[order[pos]].abs() {
            end += 1;
        }
        // ranks pos+1..=end averaged over the tie group
        let avg = (pos + 1 + end) as f64 / 2.0;
        for &i in &order[pos..end] {
            ranks[i] = avg;
        }
        pos = end;
    }
    ranks
}

/// Exact two-sided p under the sign-flip null: the distribution of W+ over
/// all 2^n sign assignments, counted by subset-sum DP on doubled ranks.
pub(crate) fn exact_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len();
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    for &r in &doubled {
        for s in (r..=total).rev() {
            counts[s] += counts[s - r];
        }
    }
    let w2 = (2.0 * w_plus).round() as usize;
    let denom = 2f64.powi(n as i32);
    let p_le: f64 = counts[..=w2].iter().map(|&c| c as f64).sum::<f64>() / denom;
    let p_ge: f64 = counts[w2..].iter().map(|&c| c as f64).sum::<f64>() / denom;
    (2.0 * p_le.min(p_ge)).min(1.0)
}

/// Normal approximation with continuity correction; the variance drops the
/// usual tie term `sum(t^3 - t) / 48`.
pub(crate) fn normal_p(ranks: &[f64], w_plus: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    // tie groups share an identical average rank
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        var -= (t * t * t - t) / 48.0;
        i = j;
    }
    if var <= 0.0 {
        return 1.0;
    }
    let z = (w_plus - mean).abs() - 0.5;
    let z = z.max(0.0) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = 2.0 * (1.0 - normal.cdf(z));
    p.clamp(f64::MIN_POSITIVE, 1.0)
}
