//! Multi-cut Benders decomposition with pluggable cut filtering.
//!
//! The crate solves two-stage scenario-based mixed-binary programs over
//! potential-driven network flows: switching and demand decisions are made
//! in a first stage, flows, potentials and capacity overloads adapt per
//! outage scenario in a second stage. Every scenario subproblem contributes
//! an optimality or feasibility cut per iteration; the `filter` module
//! decides which of those cuts actually enter the master problem.
//!
//! Modules:
//! - [`lp`]: dense two-phase simplex and branch-and-bound substrate,
//! - [`instance`]: the network model, a random generator, subproblem and
//!   extensive-form builders, and the versioned JSON instance format,
//! - [`benders`]: the iterative multi-cut loop with bound and cut logging,
//! - [`filter`]: violation, diversity (k-medoids on cosine distances),
//!   hybrid, random and aggregation-augmented selection strategies,
//! - [`stats`]: shifted geometric means, Wilcoxon signed-rank tests,
//!   performance profiles and CSV reporting,
//! - [`harness`]: batch benchmark and parameter-sweep orchestration.
//!
//! See `examples/` for runnable entry points covering each capability.

pub mod benders;
pub mod filter;
pub mod instance;
pub mod lp;
pub mod stats;

pub use benders::{run_benders, BendersConfig, Cut, CutKind, FilterContext, RunResult, RunStatus};
pub use filter::{CountPolicy, StrategyConfig, StrategyKind};
pub use instance::{
    generate_instance, read_instance, write_instance, FirstStageAssignment, GenParams,
    MasterSpace, TwoStageInstance,
};
pub use lp::{solve_lp, solve_mip, LinearProgram, LpError, LpSolution, LpStatus};
