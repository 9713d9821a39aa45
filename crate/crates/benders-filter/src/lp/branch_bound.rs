//! Best-first branch-and-bound for LPs with binary variables.
//!
//! Branching variable: the most fractional binary (value closest to 0.5),
//! ties broken by lowest index. Nodes are explored in order of their parent
//! LP bound, ties by creation order, so the search is deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{
    solve_relaxation, LinearProgram, LpError, LpSolution, LpStatus, VarBounds, VarKind, EPS_INT,
};

#[derive(Debug, Clone, Copy)]
pub struct MipConfig {
    pub max_nodes: usize,
}

impl Default for MipConfig {
    fn default() -> Self {
        MipConfig { max_nodes: 200_000 }
    }
}

struct Node {
    bound: f64,
    id: u64,
    var_bounds: Vec<VarBounds>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap; invert so the smallest bound pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Solve a mixed-binary LP to global optimality.
pub fn solve_mip(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_mip_with(lp, MipConfig::default())
}

pub fn solve_mip_with(lp: &LinearProgram, config: MipConfig) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let binaries: Vec<usize> = (0..lp.n_vars())
        .filter(|&j| lp.integrality[j] == VarKind::Binary)
        .collect();
    if binaries.is_empty() {
        return solve_relaxation(lp);
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: 0,
        var_bounds: lp.var_bounds.clone(),
    });
    let mut next_id = 1u64;
    let mut nodes_solved = 0usize;
    let mut incumbent: Option<LpSolution> = None;
    let mut incumbent_obj = f64::INFINITY;
    let mut root_farkas: Option<Vec<f64>> = None;
    let mut work = lp.clone();

    while let Some(node) = heap.pop() {
        if node.bound >= incumbent_obj - 1e-9 {
            continue; // bound cannot beat the incumbent
        }
        nodes_solved += 1;
        if nodes_solved > config.max_nodes {
            return Err(LpError::NodeLimitExceeded(config.max_nodes));
        }
        work.var_bounds = node.var_bounds;
        let sol = solve_relaxation(&work)?;
        match sol.status {
            LpStatus::Infeasible => {
                if node.id == 0 {
                    root_farkas = sol.farkas;
                }
                continue;
            }
            LpStatus::Unbounded => {
                // pre-condition is a bounded relaxation; surface it as-is
                return Ok(sol);
            }
            LpStatus::Optimal => {}
        }
        let obj = sol.objective_value();
        if obj >= incumbent_obj - 1e-9 {
            continue;
        }
        let x = sol.primal_ref();

        // most fractional binary, ties by index
        let mut branch: Option<(usize, f64)> = None;
        for &j in &binaries {
            let frac_dist = (x[j] - x[j].round()).abs();
            if frac_dist > EPS_INT {
                let score = (x[j] - x[j].floor() - 0.5).abs();
                if branch.map_or(true, |(_, s)| score < s) {
                    branch = Some((j, score));
                }
            }
        }

        match branch {
            None => {
                // integral: snap binaries exactly and recompute the objective
                let mut primal = x.to_vec();
                for &j in &binaries {
                    primal[j] = primal[j].round();
                }
                let exact_obj: f64 = lp
                    .objective
                    .iter()
                    .zip(&primal)
                    .map(|(c, v)| c * v)
                    .sum::<f64>()
                    + lp.objective_offset;
                if exact_obj < incumbent_obj {
                    incumbent_obj = exact_obj;
                    incumbent = Some(LpSolution {
                        status: LpStatus::Optimal,
                        primal: Some(primal),
                        dual: sol.dual.clone(),
                        objective: Some(exact_obj),
                        farkas: None,
                    });
                }
            }
            Some((j, _)) => {
                let mut down = work.var_bounds.clone();
                down[j] = VarBounds { lower: down[j].lower, upper: 0.0 };
                heap.push(Node { bound: obj, id: next_id, var_bounds: down });
                next_id += 1;
                let mut up = work.var_bounds.clone();
                up[j] = VarBounds { lower: 1.0, upper: up[j].upper };
                heap.push(Node { bound: obj, id: next_id, var_bounds: up });
                next_id += 1;
            }
        }
    }

    Ok(incumbent.unwrap_or(LpSolution {
        status: LpStatus::Infeasible,
        primal: None,
        dual: None,
        objective: None,
        farkas: root_farkas,
    }))
}
