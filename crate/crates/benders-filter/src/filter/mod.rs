//! Cut filtering: given the pool of Benders cuts generated in one iteration,
//! choose the subset that enters the master problem.
//!
//! All strategies share two correctness rules: every violated feasibility
//! cut is always selected, and at least one violated optimality cut is added
//! whenever the pool contains one. Strategies only decide which *optimality*
//! cuts fill the remaining budget. The optional aggregate appends one
//! violation-weighted combination of whatever was discarded.

mod aggregate;
mod kmedoids;
mod select;

pub use aggregate::aggregate_discarded;
pub use kmedoids::{cosine_distance, k_medoids, Clustering, EXACT_THRESHOLD};
pub use select::{
    priority_scores, select_diversity, select_hybrid, select_random, select_violation, violation,
    ScoredCut,
};

use thiserror::Error;

use crate::benders::{Cut, CutKind, FilterContext};

/// Absolute violation threshold: a cut counts as violated past this.
pub const EPS_CUT: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum FilterError {
    #[error("dimension mismatch: cut has {expected} coefficients, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coefficient vector has (near-)zero norm")]
    ZeroNormVector,
    #[error("invalid k = {k} for {n} items")]
    InvalidK { k: usize, n: usize },
    #[error("no cut in the pool is violated")]
    EmptyViolatedPool,
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    NoFilter,
    Random,
    Violation,
    Diversity,
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CountPolicy {
    /// keep the top k
    Fixed(usize),
    /// keep ceil(alpha * n_scenarios)
    SubproblemFraction(f64),
    /// keep ceil(beta * n_violated)
    ViolatedFraction(f64),
    /// keep until cumulative violation exceeds rho * (z_ub - z_mp)
    AdaptiveThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// append the aggregate of discarded cuts (the "+" variants)
    pub aggregate: bool,
    pub count_policy: CountPolicy,
    pub seed: u64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: StrategyKind::NoFilter,
            aggregate: false,
            count_policy: CountPolicy::SubproblemFraction(0.05),
            seed: 0,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), FilterError> {
        match self.count_policy {
            CountPolicy::Fixed(k) if k < 1 => {
                return Err(FilterError::InvalidStrategy("fixed count must be >= 1".into()));
            }
            CountPolicy::SubproblemFraction(a) if !(a > 0.0 && a <= 1.0) => {
                return Err(FilterError::InvalidStrategy(format!(
                    "subproblem fraction {a} outside (0, 1]"
                )));
            }
            CountPolicy::ViolatedFraction(b) if !(b > 0.0 && b <= 1.0) => {
                return Err(FilterError::InvalidStrategy(format!(
                    "violated fraction {b} outside (0, 1]"
                )));
            }
            CountPolicy::AdaptiveThreshold(r) => {
                if !(r >= 1.0) {
                    return Err(FilterError::InvalidStrategy(format!(
                        "adaptive threshold {r} must be >= 1"
                    )));
                }
                if self.kind != StrategyKind::Violation {
                    return Err(FilterError::InvalidStrategy(
                        "the adaptive policy is defined for the violation strategy only".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Parse a strategy spec: `none | random | violation | diversity |
    /// hybrid`, optional `+` suffix for aggregation, optional count policy
    /// `@fixed:K | @frac:A | @vfrac:B | @adaptive:R` (default `@frac:0.05`).
    /// `default` is accepted as an alias for `none`.
    pub fn parse(spec: &str) -> Result<Self, FilterError> {
        let bad = |msg: String| FilterError::InvalidStrategy(msg);
        let (name_part, policy_part) = match spec.split_once('@') {
            Some((n, p)) => (n, Some(p)),
            None => (spec, None),
        };
        let (name, aggregate) = match name_part.strip_suffix('+') {
            Some(n) => (n, true),
            None => (name_part, false),
        };
        let kind = match name {
            "none" | "default" => StrategyKind::NoFilter,
            "random" => StrategyKind::Random,
            "violation" => StrategyKind::Violation,
            "diversity" => StrategyKind::Diversity,
            "hybrid" => StrategyKind::Hybrid,
            other => return Err(bad(format!("unknown strategy '{other}'"))),
        };
        let count_policy = match policy_part {
            None => CountPolicy::SubproblemFraction(0.05),
            Some(p) => {
                let (mode, value) = p
                    .split_once(':')
                    .ok_or_else(|| bad(format!("count policy '{p}' needs mode:value")))?;
                let parse_f = |v: &str| {
                    v.parse::<f64>().map_err(|_| bad(format!("bad numeric value '{v}'")))
                };
                match mode {
                    "fixed" => CountPolicy::Fixed(
                        value.parse::<usize>().map_err(|_| bad(format!("bad count '{value}'")))?,
                    ),
                    "frac" => CountPolicy::SubproblemFraction(parse_f(value)?),
                    "vfrac" => CountPolicy::ViolatedFraction(parse_f(value)?),
                    "adaptive" => CountPolicy::AdaptiveThreshold(parse_f(value)?),
                    other => return Err(bad(format!("unknown count mode '{other}'"))),
                }
            }
        };
        let config = StrategyConfig { kind, aggregate, count_policy, seed: 0 };
        config.validate()?;
        Ok(config)
    }

    /// The six benchmark configurations by name: `default`, `random`,
    /// `violation`, `diversity`, `hybrid`, `hybrid+`.
    pub fn preset(name: &str) -> Result<Self, FilterError> {
        Self::parse(name)
    }

    pub fn spec_string(&self) -> String {
        let name = match self.kind {
            StrategyKind::NoFilter => "none",
            StrategyKind::Random => "random",
            StrategyKind::Violation => "violation",
            StrategyKind::Diversity => "diversity",
            StrategyKind::Hybrid => "hybrid",
        };
        let plus = if self.aggregate { "+" } else { "" };
        let policy = match self.count_policy {
            CountPolicy::Fixed(k) => format!("@fixed:{k}"),
            CountPolicy::SubproblemFraction(a) => format!("@frac:{a}"),
            CountPolicy::ViolatedFraction(b) => format!("@vfrac:{b}"),
            CountPolicy::AdaptiveThreshold(r) => format!("@adaptive:{r}"),
        };
        format!("{name}{plus}{policy}")
    }
}

impl std::fmt::Display for StrategyConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.spec_string())
    }
}

/// Outcome of one filtering call: the cuts to add, in order.
#[derive(Debug, Clone)]
pub struct FilterSelection {
    pub cuts: Vec<Cut>,
    pub n_feasibility: usize,
    pub aggregate_added: bool,
    /// the cut budget implied by the count policy, when one exists
    pub budget: Option<usize>,
}

/// Single entry point used by the Benders loop.
///
/// Rules, in order: (1) score the violated pool; (2) select every violated
/// feasibility cut, counted against the budget; (3) fill the remaining budget
/// from violated optimality cuts via the strategy's selector; (4) if
/// feasibility cuts exhausted the budget but a violated optimality cut
/// exists, append the single most-violated one beyond budget; (5) append the
/// aggregate of discarded cuts when configured. `next_cut_id` names the
/// aggregate cut if one is created.
pub fn filter(
    pool: &[Cut],
    ctx: &FilterContext,
    config: &StrategyConfig,
    next_cut_id: u64,
) -> Result<FilterSelection, FilterError> {
    config.validate()?;
    let scored = priority_scores(pool, &ctx.x)?;
    let violated: Vec<ScoredCut> =
        scored.iter().copied().filter(|s| s.violation > EPS_CUT).collect();
    if violated.is_empty() {
        return Err(FilterError::EmptyViolatedPool);
    }

    if config.kind == StrategyKind::NoFilter {
        let selected: Vec<usize> = violated.iter().map(|s| s.index).collect();
        let n_feasibility =
            violated.iter().filter(|s| s.kind == CutKind::Feasibility).count();
        // nothing is discarded, so the aggregate is empty by construction
        return Ok(FilterSelection {
            cuts: selected.iter().map(|&i| pool[i].clone()).collect(),
            n_feasibility,
            aggregate_added: false,
            budget: None,
        });
    }

    // (2) feasibility cuts first, in priority order
    let mut feas: Vec<ScoredCut> =
        violated.iter().copied().filter(|s| s.kind == CutKind::Feasibility).collect();
    select::sort_by_priority(&mut feas);
    let opt: Vec<ScoredCut> =
        violated.iter().copied().filter(|s| s.kind == CutKind::Optimality).collect();

    let budget = match config.count_policy {
        CountPolicy::Fixed(k) => Some(k),
        CountPolicy::SubproblemFraction(a) => {
            Some((a * ctx.n_scenarios as f64).ceil() as usize)
        }
        CountPolicy::ViolatedFraction(b) => Some((b * violated.len() as f64).ceil() as usize),
        CountPolicy::AdaptiveThreshold(_) => None,
    };

    // (3) remaining budget via the strategy's optimality-cut selector
    let opt_budget = budget.map(|b| b.saturating_sub(feas.len()));
    let opt_selected: Vec<usize> = if opt.is_empty() {
        Vec::new()
    } else {
        match config.kind {
            StrategyKind::NoFilter => unreachable!("handled above"),
            StrategyKind::Violation => match config.count_policy {
                CountPolicy::AdaptiveThreshold(_) => {
                    select_violation(&opt, &config.count_policy, ctx)
                }
                _ => select_violation(&opt, &CountPolicy::Fixed(opt_budget.unwrap_or(0).max(0)), ctx),
            },
            StrategyKind::Random | StrategyKind::Diversity | StrategyKind::Hybrid => {
                let k = opt_budget.expect("budgeted policies only for these kinds");
                if k == 0 {
                    Vec::new()
                } else {
                    let refs: Vec<&Cut> = opt.iter().map(|s| &pool[s.index]).collect();
                    let local = match config.kind {
                        StrategyKind::Random => select_random(
                            refs.len(),
                            k,
                            mix_seed(config.seed, ctx.iteration),
                        ),
                        StrategyKind::Diversity => select_diversity(&refs, k, config.seed)?,
                        StrategyKind::Hybrid => {
                            // cluster over master-space coefficients, judge
                            // violation at the current point
                            select_hybrid(&refs, k, &ctx.x, config.seed)?
                        }
                        _ => unreachable!(),
                    };
                    local.into_iter().map(|i| opt[i].index).collect()
                }
            }
        }
    };

    let mut selected: Vec<usize> = feas.iter().map(|s| s.index).collect();
    selected.extend(&opt_selected);

    // (4) never let feasibility cuts crowd out every optimality cut
    let mut rule4 = false;
    if opt_selected.is_empty() && !opt.is_empty() {
        let mut best = opt.clone();
        select::sort_by_priority(&mut best);
        selected.push(best[0].index);
        rule4 = true;
    }

    let mut cuts: Vec<Cut> = selected.iter().map(|&i| pool[i].clone()).collect();
    let mut aggregate_added = false;
    if config.aggregate {
        if let Some(agg) =
            aggregate_discarded(pool, &selected, &ctx.x, next_cut_id, ctx.iteration)?
        {
            debug_assert!(violation(&agg, &ctx.x)? > 0.0, "aggregate of violated cuts is violated");
            cuts.push(agg);
            aggregate_added = true;
        }
    }

    debug_assert!(
        cuts.iter()
            .all(|c| violation(c, &ctx.x).map(|v| v > EPS_CUT * 1e-3).unwrap_or(false)),
        "only violated cuts may be selected"
    );
    if let Some(b) = budget {
        let cap = b.max(feas.len() + usize::from(rule4)) + usize::from(aggregate_added);
        debug_assert!(cuts.len() <= cap, "selected {} cuts, cap {cap}", cuts.len());
    }

    Ok(FilterSelection {
        cuts,
        n_feasibility: feas.len(),
        aggregate_added,
        budget,
    })
}

/// Per-iteration seed for the random strategy; selection stays deterministic
/// in (seed, iteration) while differing across iterations.
fn mix_seed(seed: u64, iteration: usize) -> u64 {
    seed ^ (iteration as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[cfg(test)]
mod tests;
