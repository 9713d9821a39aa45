//! Violation-weighted aggregation of discarded cuts (the "+" variants).

use crate::benders::{Cut, CutKind, CutOrigin};

use super::{select::violation, FilterError, EPS_CUT};

/// Combine the violated, non-selected *optimality* cuts into one constraint
/// with violation-normalized weights `w_c = v(c) / sum v`. The aggregate's
/// theta block is the same convex combination, so every theta that lost its
/// own cut keeps some constraint bounding it from below. Returns `None` when
/// nothing was discarded. Discarded feasibility cuts are not aggregated; an
/// optimality/feasibility mixture has no coherent theta interpretation.
pub fn aggregate_discarded(
    pool: &[Cut],
    selected: &[usize],
    x: &[f64],
    id: u64,
    iteration: usize,
) -> Result<Option<Cut>, FilterError> {
    let mut rest: Vec<(usize, f64)> = Vec::new();
    for (i, cut) in pool.iter().enumerate() {
        if cut.kind != CutKind::Optimality || selected.contains(&i) {
            continue;
        }
        let v = violation(cut, x)?;
        if v > EPS_CUT {
            rest.push((i, v));
        }
    }
    if rest.is_empty() {
        return Ok(None);
    }
    let total: f64 = rest.iter().map(|(_, v)| v).sum();
    let dim = pool[rest[0].0].coeffs.len();
    let mut coeffs = vec![0.0; dim];
    let mut rhs = 0.0;
    for &(i, v) in &rest {
        let w = v / total;
        for (acc, a) in coeffs.iter_mut().zip(&pool[i].coeffs) {
            *acc += w * a;
        }
        rhs += w * pool[i].rhs;
    }
    Ok(Some(Cut {
        id,
        origin: CutOrigin::Aggregate,
        kind: CutKind::Optimality,
        coeffs,
        rhs,
        iteration_created: iteration,
    }))
}
