//! The iterative multi-cut Benders loop.

use std::collections::HashMap;
use std::time::Instant;

use log::{debug, warn};
use rayon::prelude::*;

use crate::filter::{self, StrategyKind, EPS_CUT};
use crate::instance::{
    first_stage_cost, instantiate_subproblem, scenario_lp, FirstStageAssignment, MasterSpace,
    ScenarioLp, TwoStageInstance,
};
use crate::lp::{
    solve_lp, solve_mip, LinearProgram, LpError, LpStatus, Relation, VarBounds, VarKind,
};

use super::{
    BendersConfig, Cut, CutKind, CutOrigin, FilterContext, IterationRecord, RunResult, RunStatus,
};

/// Precomputed scenario structure; evaluating a scenario at a first-stage
/// point is a pure function, safe to run in parallel.
pub struct SubproblemOracle {
    space: MasterSpace,
    scenario_lps: Vec<ScenarioLp>,
}

impl SubproblemOracle {
    pub fn new(inst: &TwoStageInstance) -> Self {
        let space = MasterSpace::of(inst);
        let scenario_lps = (0..inst.n_scenarios()).map(|s| scenario_lp(inst, s)).collect();
        SubproblemOracle { space, scenario_lps }
    }

    pub fn space(&self) -> &MasterSpace {
        &self.space
    }

    /// Solve scenario `s` at the (z, b) prefix and derive its cut.
    ///
    /// Feasible subproblems return `(Some(recourse), optimality cut)` where
    /// the cut `theta_s >= g'(z, b) + const` is tight at the evaluated point:
    /// its implied lower bound there equals the recourse value. Infeasible
    /// subproblems return `(None, feasibility cut)` built from the Farkas
    /// certificate; the cut excludes every first stage whose right-hand side
    /// the certificate proves unbalanceable.
    pub fn evaluate(
        &self,
        s: usize,
        zb: &[f64],
        cut_id: u64,
        iteration: usize,
    ) -> Result<(Option<f64>, Cut), LpError> {
        let sl = &self.scenario_lps[s];
        let lp = instantiate_subproblem(sl, zb);
        let sol = solve_lp(&lp)?;
        let dim = self.space.dim();
        match sol.status {
            LpStatus::Optimal => {
                let recourse = sol.objective_value();
                let duals = sol.dual.as_ref().expect("optimal LP carries duals");
                let mut coeffs = vec![0.0; dim];
                for (row, &y) in sl.rows.iter().zip(duals) {
                    if y != 0.0 {
                        for &(col, tv) in &row.t {
                            coeffs[col] += y * tv;
                        }
                    }
                }
                let g_dot_zb: f64 = coeffs[..zb.len()]
                    .iter()
                    .zip(zb)
                    .map(|(g, v)| g * v)
                    .sum();
                coeffs[self.space.theta_col(s)] = -1.0;
                let cut = Cut {
                    id: cut_id,
                    origin: CutOrigin::Scenario(s),
                    kind: CutKind::Optimality,
                    coeffs,
                    rhs: g_dot_zb - recourse,
                    iteration_created: iteration,
                };
                Ok((Some(recourse), cut))
            }
            LpStatus::Infeasible => {
                let mu = sol.farkas.as_ref().expect("infeasible LP carries a certificate");
                // aggregate the second-stage coefficients; the box minimum of
                // w'y moves into the cut constant
                let mut w = vec![0.0; sl.n_y];
                let mut h_agg = 0.0;
                let mut coeffs = vec![0.0; dim];
                for (row, &m) in sl.rows.iter().zip(mu) {
                    if m == 0.0 {
                        continue;
                    }
                    for &(col, a) in &row.coeffs {
                        w[col] += m * a;
                    }
                    for &(col, tv) in &row.t {
                        coeffs[col] -= m * tv;
                    }
                    h_agg += m * row.h;
                }
                let w_scale = w.iter().fold(1.0f64, |a, b| a.max(b.abs()));
                let mut box_min = 0.0;
                for (j, b) in sl.bounds.iter().enumerate() {
                    let wj = if w[j].abs() <= 1e-9 * w_scale { 0.0 } else { w[j] };
                    if wj > 0.0 {
                        box_min += wj * b.lower;
                    } else if wj < 0.0 {
                        box_min += wj * b.upper;
                    }
                    if !box_min.is_finite() {
                        return Err(LpError::NumericalFailure(format!(
                            "feasibility cut for scenario {s} hit an unbounded box term"
                        )));
                    }
                }
                let cut = Cut {
                    id: cut_id,
                    origin: CutOrigin::Scenario(s),
                    kind: CutKind::Feasibility,
                    coeffs,
                    rhs: h_agg - box_min,
                    iteration_created: iteration,
                };
                Ok((None, cut))
            }
            LpStatus::Unbounded => Err(LpError::NumericalFailure(format!(
                "scenario {s} subproblem unbounded; overload slacks should prevent this"
            ))),
        }
    }
}

/// Convenience wrapper around [`SubproblemOracle::evaluate`] matching the
/// one-off use case.
pub fn evaluate_subproblem(
    inst: &TwoStageInstance,
    scenario_idx: usize,
    fixed: &FirstStageAssignment,
) -> Result<(Option<f64>, Cut), LpError> {
    SubproblemOracle::new(inst).evaluate(scenario_idx, &fixed.zb_vector(), 0, 0)
}

fn master_skeleton(inst: &TwoStageInstance, space: &MasterSpace) -> LinearProgram {
    let net = &inst.network;
    let mut lp = LinearProgram::new(space.dim());
    for (k, &arc) in space.switchable_arcs.iter().enumerate() {
        let col = space.z_col(k);
        lp.objective[col] = -net.arcs[arc].switch_cost;
        lp.var_bounds[col] = VarBounds { lower: 0.0, upper: 1.0 };
        lp.integrality[col] = VarKind::Binary;
        lp.objective_offset += net.arcs[arc].switch_cost;
    }
    for (k, d) in net.demands.iter().enumerate() {
        let col = space.b_col(k);
        lp.objective[col] = -d.value_coeff;
        lp.var_bounds[col] = VarBounds { lower: d.lo, upper: d.hi };
        lp.objective_offset += d.value_coeff * d.hi;
    }
    for (s, sc) in inst.scenarios.iter().enumerate() {
        let col = space.theta_col(s);
        lp.objective[col] = sc.weight;
        // recourse is a nonnegative overload penalty, so 0 is a valid floor
        lp.var_bounds[col] = VarBounds { lower: 0.0, upper: f64::INFINITY };
    }
    lp
}

pub fn run_benders(inst: &TwoStageInstance, config: &BendersConfig) -> RunResult {
    run_benders_observed(inst, config, |_| {})
}

/// `observe` receives every batch of cuts actually added to the master, once
/// per iteration, before the next master solve.
pub fn run_benders_observed(
    inst: &TwoStageInstance,
    config: &BendersConfig,
    mut observe: impl FnMut(&[Cut]),
) -> RunResult {
    let t0 = Instant::now();
    let fail = |iteration: usize, message: String, records: Vec<IterationRecord>, t0: Instant| {
        RunResult {
            status: RunStatus::Error { iteration, message },
            objective: f64::INFINITY,
            gap: f64::INFINITY,
            total_time: t0.elapsed().as_secs_f64(),
            iterations: records,
            total_cuts_added: 0,
            incumbent: None,
        }
    };
    if let Err(e) = inst.validate() {
        return fail(0, format!("invalid instance: {e}"), Vec::new(), t0);
    }
    if let Err(e) = config.strategy.validate() {
        return fail(0, format!("invalid strategy: {e}"), Vec::new(), t0);
    }

    let pool = config.jobs.and_then(|n| {
        (n > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool")
        })
    });
    let sequential = config.jobs == Some(1);

    let oracle = SubproblemOracle::new(inst);
    let space = oracle.space().clone();
    let mut master = master_skeleton(inst, &space);
    let weights: Vec<f64> = inst.scenarios.iter().map(|s| s.weight).collect();

    let mut records: Vec<IterationRecord> = Vec::new();
    let mut z_ub = f64::INFINITY;
    let mut z_mp = f64::NEG_INFINITY;
    let mut incumbent: Option<FirstStageAssignment> = None;
    let mut next_cut_id: u64 = 0;
    let mut total_cuts_added = 0usize;
    let mut seen_assignments: HashMap<Vec<u64>, usize> = HashMap::new();

    let mut status = RunStatus::IterationLimit;
    for iteration in 0..config.max_iterations {
        if t0.elapsed().as_secs_f64() > config.time_limit {
            status = RunStatus::TimeLimit;
            break;
        }

        let t_master = Instant::now();
        let master_sol = match solve_mip(&master) {
            Ok(s) => s,
            Err(e) => return fail(iteration, format!("master solve failed: {e}"), records, t0),
        };
        let master_time = t_master.elapsed().as_secs_f64();
        match master_sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => {
                return fail(
                    iteration,
                    "master infeasible: no first stage satisfies the accumulated cuts".into(),
                    records,
                    t0,
                );
            }
            LpStatus::Unbounded => {
                return fail(iteration, "master unbounded".into(), records, t0);
            }
        }
        let x = master_sol.primal.clone().expect("optimal master has a point");
        let new_z_mp = master_sol.objective_value();
        debug_assert!(
            new_z_mp >= z_mp - 1e-7 * (1.0 + z_mp.abs()),
            "master bound regressed: {z_mp} -> {new_z_mp}"
        );
        z_mp = if z_mp.is_finite() { z_mp.max(new_z_mp) } else { new_z_mp };

        let assignment = FirstStageAssignment::from_master_point(&space, &x);
        let zb = assignment.zb_vector();

        // repeated (z, b) proposals are expected while theta values catch up;
        // log them so the adaptive policy's effect is visible
        let key: Vec<u64> = zb.iter().map(|v| ((v / 1e-9).round() as i64) as u64).collect();
        let repeats = seen_assignments.entry(key).or_insert(0);
        *repeats += 1;
        if *repeats > 1 {
            debug!("iteration {iteration}: first-stage assignment repeated ({repeats} times)");
        }

        let t_sub = Instant::now();
        let base_id = next_cut_id;
        let eval_one = |s: usize| oracle.evaluate(s, &zb, base_id + s as u64, iteration);
        let evals: Result<Vec<(Option<f64>, Cut)>, LpError> = if sequential {
            (0..inst.n_scenarios()).map(eval_one).collect()
        } else if let Some(p) = &pool {
            p.install(|| (0..inst.n_scenarios()).into_par_iter().map(eval_one).collect())
        } else {
            (0..inst.n_scenarios()).into_par_iter().map(eval_one).collect()
        };
        let evals = match evals {
            Ok(v) => v,
            Err(e) => return fail(iteration, format!("subproblem failed: {e}"), records, t0),
        };
        next_cut_id += inst.n_scenarios() as u64;
        let subproblem_time = t_sub.elapsed().as_secs_f64();

        let cut_pool: Vec<Cut> = evals.iter().map(|(_, c)| c.clone()).collect();
        if evals.iter().all(|(r, _)| r.is_some()) {
            let recourse: f64 = evals
                .iter()
                .zip(&weights)
                .map(|((r, _), w)| w * r.unwrap())
                .sum();
            let candidate = first_stage_cost(inst, &assignment.z, &assignment.b) + recourse;
            if candidate < z_ub {
                z_ub = candidate;
                incumbent = Some(assignment.clone());
            }
        }
        debug_assert!(
            !z_ub.is_finite() || z_mp <= z_ub + 1e-7 * (1.0 + z_ub.abs()),
            "lower bound {z_mp} above incumbent {z_ub}"
        );

        let violations: Vec<f64> = cut_pool
            .iter()
            .map(|c| filter::violation(c, &x).expect("pool cuts live in master space"))
            .collect();
        let n_violated = violations.iter().filter(|&&v| v > EPS_CUT).count();
        let n_violated_feasibility = cut_pool
            .iter()
            .zip(&violations)
            .filter(|(c, &v)| c.kind == CutKind::Feasibility && v > EPS_CUT)
            .count();

        let mut record = IterationRecord {
            iteration,
            pool_size: cut_pool.len(),
            n_violated,
            n_violated_feasibility,
            n_selected: 0,
            n_feasibility_selected: 0,
            aggregate_added: false,
            z_mp,
            z_ub,
            master_time,
            subproblem_time,
            filter_time: 0.0,
        };

        if n_violated == 0 {
            records.push(record);
            status = RunStatus::Optimal;
            break;
        }
        if z_ub.is_finite() && (z_ub - z_mp) <= config.gap_tol * z_ub.abs().max(1.0) {
            records.push(record);
            status = RunStatus::Optimal;
            break;
        }

        let ctx = FilterContext {
            x: x.clone(),
            z_ub,
            z_mp,
            iteration,
            n_scenarios: inst.n_scenarios(),
        };
        let t_filter = Instant::now();
        let selection = match filter::filter(&cut_pool, &ctx, &config.strategy, next_cut_id) {
            Ok(s) => s,
            Err(e) => return fail(iteration, format!("filter failed: {e}"), records, t0),
        };
        record.filter_time = t_filter.elapsed().as_secs_f64();
        if selection.aggregate_added {
            next_cut_id += 1;
        }

        observe(&selection.cuts);
        for cut in &selection.cuts {
            master.add_row(cut.coeffs.clone(), Relation::Le, cut.rhs);
        }
        record.n_selected = selection.cuts.len();
        record.n_feasibility_selected = selection.n_feasibility;
        record.aggregate_added = selection.aggregate_added;
        total_cuts_added += selection.cuts.len();
        records.push(record);

        if config.strategy.kind == StrategyKind::NoFilter && records.len() % 50 == 0 {
            warn!(
                "unfiltered master has {} rows after {} iterations",
                master.rows.len(),
                records.len()
            );
        }
    }

    let objective = if z_ub.is_finite() { z_ub } else { z_mp };
    let gap = if z_ub.is_finite() {
        ((z_ub - z_mp) / z_ub.abs().max(1.0)).max(0.0)
    } else {
        f64::INFINITY
    };
    RunResult {
        status,
        objective,
        gap,
        total_time: t0.elapsed().as_secs_f64(),
        iterations: records,
        total_cuts_added,
        incumbent,
    }
}
