//! Cut scoring and the per-strategy selection rules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::benders::{Cut, CutKind, FilterContext};

use super::{CountPolicy, FilterError, EPS_CUT};

/// Absolute violation `max(0, coeffs'x - rhs)`; deliberately not normalized
/// by the coefficient norm.
pub fn violation(cut: &Cut, x: &[f64]) -> Result<f64, FilterError> {
    if cut.coeffs.len() != x.len() {
        return Err(FilterError::DimensionMismatch { expected: cut.coeffs.len(), got: x.len() });
    }
    Ok((cut.lhs(x) - cut.rhs).max(0.0))
}

/// A cut's violation and selection priority at the current master point.
/// Feasibility-cut priorities are lifted above every optimality violation.
#[derive(Debug, Clone, Copy)]
pub struct ScoredCut {
    /// position in the pool slice that was scored
    pub index: usize,
    pub cut_id: u64,
    pub kind: CutKind,
    pub violation: f64,
    pub priority: f64,
}

/// Score a pool against `x`. Optimality cuts score their own violation;
/// every *violated* feasibility cut scores `V_max + 1 + violation`, where
/// `V_max` is the largest optimality violation in the pool, so violated
/// feasibility cuts outrank all optimality cuts while keeping their own
/// relative order.
pub fn priority_scores(pool: &[Cut], x: &[f64]) -> Result<Vec<ScoredCut>, FilterError> {
    let mut scored = Vec::with_capacity(pool.len());
    let mut v_max: f64 = 0.0;
    for (index, cut) in pool.iter().enumerate() {
        let v = violation(cut, x)?;
        if cut.kind == CutKind::Optimality {
            v_max = v_max.max(v);
        }
        scored.push(ScoredCut { index, cut_id: cut.id, kind: cut.kind, violation: v, priority: v });
    }
    for s in &mut scored {
        if s.kind == CutKind::Feasibility && s.violation > EPS_CUT {
            s.priority = v_max + 1.0 + s.violation;
        }
    }
    Ok(scored)
}

/// Sort order used everywhere: priority descending, ties by cut id ascending.
pub(super) fn sort_by_priority(scored: &mut [ScoredCut]) {
    scored.sort_by(|a, b| b.priority.total_cmp(&a.priority).then(a.cut_id.cmp(&b.cut_id)));
}

/// Violation-based selection. Budgeted policies take the top of the priority
/// order; the adaptive policy keeps taking until the cumulative violation of
/// the taken *optimality* cuts first exceeds `rho * (z_ub - z_mp)` (falling
/// back to a 5% subproblem fraction while no incumbent exists). Only violated
/// cuts are ever returned. Returns `index` values of the chosen cuts.
pub fn select_violation(
    scored: &[ScoredCut],
    policy: &CountPolicy,
    ctx: &FilterContext,
) -> Vec<usize> {
    let mut cand: Vec<ScoredCut> = scored
        .iter()
        .copied()
        .filter(|s| s.violation > EPS_CUT)
        .collect();
    sort_by_priority(&mut cand);
    let n_viol = cand.len();
    let take_top = |k: usize| -> Vec<usize> {
        cand.iter().take(k).map(|s| s.index).collect()
    };
    match *policy {
        CountPolicy::Fixed(k) => take_top(k),
        CountPolicy::SubproblemFraction(alpha) => {
            take_top((alpha * ctx.n_scenarios as f64).ceil() as usize)
        }
        CountPolicy::ViolatedFraction(beta) => take_top((beta * n_viol as f64).ceil() as usize),
        CountPolicy::AdaptiveThreshold(rho) => {
            if !ctx.z_ub.is_finite() {
                return take_top((0.05 * ctx.n_scenarios as f64).ceil() as usize);
            }
            let threshold = rho * (ctx.z_ub - ctx.z_mp);
            let mut out = Vec::new();
            let mut cum = 0.0;
            for s in &cand {
                out.push(s.index);
                if s.kind == CutKind::Optimality {
                    cum += s.violation;
                }
                if cum > threshold && !out.is_empty() {
                    break;
                }
            }
            out
        }
    }
}

/// Indices (into `pool_opt`) of cluster representatives nearest the cluster
/// centroid in Euclidean distance, ties to the lower cut id.
pub fn select_diversity(pool_opt: &[&Cut], k: usize, seed: u64) -> Result<Vec<usize>, FilterError> {
    cluster_representatives(pool_opt, k, seed, |members, items, _| {
        let dim = items[members[0]].len();
        let mut centroid = vec![0.0; dim];
        for &i in members {
            for (c, v) in centroid.iter_mut().zip(&items[i]) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= members.len() as f64;
        }
        members
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da: f64 = items[a].iter().zip(&centroid).map(|(x, c)| (x - c) * (x - c)).sum();
                let db: f64 = items[b].iter().zip(&centroid).map(|(x, c)| (x - c) * (x - c)).sum();
                da.total_cmp(&db)
            })
            .expect("cluster nonempty")
    })
}

/// Indices of the most-violated cut per cluster, ties to the lower cut id.
pub fn select_hybrid(
    pool_opt: &[&Cut],
    k: usize,
    x: &[f64],
    seed: u64,
) -> Result<Vec<usize>, FilterError> {
    let violations: Vec<f64> = pool_opt
        .iter()
        .map(|c| violation(c, x))
        .collect::<Result<_, _>>()?;
    cluster_representatives(pool_opt, k, seed, move |members, _, _| {
        // strict comparison over id-sorted members: ties keep the lower id
        let mut best = members[0];
        for &i in &members[1..] {
            if violations[i] > violations[best] {
                best = i;
            }
        }
        best
    })
}

/// Shared clustering step of the diversity and hybrid strategies: identical
/// inputs produce identical partitions, only the representative rule differs.
fn cluster_representatives(
    pool_opt: &[&Cut],
    k: usize,
    seed: u64,
    pick: impl Fn(&[usize], &[Vec<f64>], usize) -> usize,
) -> Result<Vec<usize>, FilterError> {
    if pool_opt.is_empty() {
        return Ok(Vec::new());
    }
    let k = k.min(pool_opt.len());
    if k == 0 {
        return Ok(Vec::new());
    }
    let items: Vec<Vec<f64>> = pool_opt.iter().map(|c| c.coeffs.clone()).collect();
    let clustering = super::kmedoids::k_medoids(&items, k, seed)?;
    let mut reps = Vec::with_capacity(k);
    for c in 0..clustering.k() {
        let mut members = clustering.members(c);
        // lower cut id wins representative ties: pre-sort members by id so a
        // strict comparison in `pick` resolves in id order
        members.sort_by_key(|&i| pool_opt[i].id);
        reps.push(pick(&members, &items, c));
    }
    reps.sort_by_key(|&i| pool_opt[i].id);
    Ok(reps)
}

/// Uniform sample without replacement from the pool, deterministic in `seed`.
pub fn select_random(pool_len: usize, k: usize, seed: u64) -> Vec<usize> {
    let take = k.min(pool_len);
    if take == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, pool_len, take).into_vec();
    picked.sort_unstable();
    picked
}
