//! Multi-cut Benders decomposition over the two-stage instances.
//!
//! The master problem carries the first-stage variables plus one recourse
//! variable theta per scenario; every iteration solves all scenario
//! subproblems at the master candidate, turns their duals (or Farkas rays)
//! into cuts, and asks the configured filter which cuts to add.

mod engine;

pub use engine::{evaluate_subproblem, run_benders, run_benders_observed, SubproblemOracle};

use crate::instance::FirstStageAssignment;
use crate::filter::StrategyConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutKind {
    Optimality,
    Feasibility,
}

/// What produced a cut: a scenario subproblem, or the violation-weighted
/// aggregation of discarded cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutOrigin {
    Scenario(usize),
    Aggregate,
}

/// A master constraint `coeffs' x <= rhs` over the master variable space
/// (z, b, theta_1..theta_n). Optimality cuts from scenario `s` carry exactly
/// -1 on theta_s and 0 on every other theta; feasibility cuts have an all-zero
/// theta block.
#[derive(Debug, Clone)]
pub struct Cut {
    pub id: u64,
    pub origin: CutOrigin,
    pub kind: CutKind,
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub iteration_created: usize,
}

impl Cut {
    pub fn scenario_id(&self) -> Option<usize> {
        match self.origin {
            CutOrigin::Scenario(s) => Some(s),
            CutOrigin::Aggregate => None,
        }
    }

    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }
}

/// Everything a filtering strategy may read at selection time.
#[derive(Debug, Clone)]
pub struct FilterContext {
    /// current master solution over (z, b, theta)
    pub x: Vec<f64>,
    /// incumbent objective, +inf before the first feasible candidate
    pub z_ub: f64,
    /// current master objective (lower bound)
    pub z_mp: f64,
    pub iteration: usize,
    pub n_scenarios: usize,
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub pool_size: usize,
    pub n_violated: usize,
    pub n_violated_feasibility: usize,
    pub n_selected: usize,
    pub n_feasibility_selected: usize,
    pub aggregate_added: bool,
    pub z_mp: f64,
    pub z_ub: f64,
    pub master_time: f64,
    pub subproblem_time: f64,
    pub filter_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Optimal,
    TimeLimit,
    IterationLimit,
    Error { iteration: usize, message: String },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            RunStatus::Optimal => "Optimal",
            RunStatus::TimeLimit => "TimeLimit",
            RunStatus::IterationLimit => "IterationLimit",
            RunStatus::Error { .. } => "Error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub status: RunStatus,
    /// incumbent objective (true cost of the best first stage found)
    pub objective: f64,
    /// (z_ub - z_mp) / max(1, |z_ub|)
    pub gap: f64,
    pub total_time: f64,
    pub iterations: Vec<IterationRecord>,
    pub total_cuts_added: usize,
    pub incumbent: Option<FirstStageAssignment>,
}

impl RunResult {
    pub fn n_iterations(&self) -> usize {
        self.iterations.len()
    }
}

#[derive(Debug, Clone)]
pub struct BendersConfig {
    pub strategy: StrategyConfig,
    pub gap_tol: f64,
    pub time_limit: f64,
    pub max_iterations: usize,
    /// subproblem evaluation threads; `None` uses the global rayon pool
    pub jobs: Option<usize>,
}

impl Default for BendersConfig {
    fn default() -> Self {
        BendersConfig {
            strategy: StrategyConfig::default(),
            gap_tol: 1e-6,
            time_limit: 600.0,
            max_iterations: 10_000,
            jobs: None,
        }
    }
}

impl BendersConfig {
    pub fn with_strategy(strategy: StrategyConfig) -> Self {
        BendersConfig { strategy, ..Default::default() }
    }
}
