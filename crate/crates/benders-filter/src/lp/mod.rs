//! Dense LP/MIP substrate: a two-phase bounded-variable simplex with dual
//! multipliers and Farkas infeasibility certificates, plus a best-first
//! branch-and-bound for binary variables.
//!
//! Everything here is minimization-sense. Instances are desk scale (at most
//! a few hundred rows), so all storage is dense and there is no presolve.

mod branch_bound;
mod simplex;

pub use branch_bound::{solve_mip, solve_mip_with, MipConfig};

use thiserror::Error;

/// Feasibility tolerance for row residuals, bound violations and the
/// duality-gap check.
pub const EPS_FEAS: f64 = 1e-7;
/// Integrality tolerance for binary variables.
pub const EPS_INT: f64 = 1e-6;
/// Smallest pivot magnitude the simplex will accept.
pub const EPS_PIVOT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy)]
pub struct VarBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program `min c'x + offset` subject to rows and variable bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    /// Constant added to every reported objective value.
    pub objective_offset: f64,
    pub rows: Vec<Row>,
    pub var_bounds: Vec<VarBounds>,
    pub integrality: Vec<VarKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `dual` carries one multiplier per row such that for an
/// optimal basis `c'x = dual'rhs + sum_j d_j x_j` over nonbasic variables at
/// their bounds (`d` = reduced costs). `farkas` carries one multiplier per
/// row certifying infeasibility; see [`check_farkas`] for the exact
/// convention.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Option<Vec<f64>>,
    pub dual: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub farkas: Option<Vec<f64>>,
}

impl LpSolution {
    pub fn objective_value(&self) -> f64 {
        self.objective.expect("objective available only for Optimal")
    }

    pub fn primal_ref(&self) -> &[f64] {
        self.primal.as_deref().expect("primal available only for Optimal")
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("node limit exceeded after {0} nodes")]
    NodeLimitExceeded(usize),
}

impl LinearProgram {
    /// An empty program over `n` free continuous variables.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            objective_offset: 0.0,
            rows: Vec::new(),
            var_bounds: vec![
                VarBounds {
                    lower: f64::NEG_INFINITY,
                    upper: f64::INFINITY,
                };
                n
            ],
            integrality: vec![VarKind::Continuous; n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.n_vars());
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.var_bounds[var] = VarBounds { lower, upper };
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.n_vars();
        if self.var_bounds.len() != n || self.integrality.len() != n {
            return Err(LpError::Invalid(format!(
                "bounds/integrality length mismatch: {} vars, {} bounds, {} kinds",
                n,
                self.var_bounds.len(),
                self.integrality.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Invalid(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() {
                return Err(LpError::Invalid(format!("row {i} has non-finite rhs")));
            }
        }
        for (j, b) in self.var_bounds.iter().enumerate() {
            if b.lower > b.upper {
                return Err(LpError::Invalid(format!(
                    "variable {j}: lower {} > upper {}",
                    b.lower, b.upper
                )));
            }
            if self.integrality[j] == VarKind::Binary
                && (b.lower < -EPS_INT || b.upper > 1.0 + EPS_INT)
            {
                return Err(LpError::Invalid(format!(
                    "binary variable {j} has bounds [{}, {}] outside [0, 1]",
                    b.lower, b.upper
                )));
            }
        }
        Ok(())
    }
}

/// Solve an LP with all variables continuous.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    if lp.integrality.iter().any(|k| *k == VarKind::Binary) {
        return Err(LpError::Invalid(
            "solve_lp requires all variables continuous; use solve_mip".into(),
        ));
    }
    simplex::solve(lp)
}

/// Solve ignoring integrality flags (LP relaxation). Used by branch-and-bound.
pub(crate) fn solve_relaxation(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    simplex::solve(lp)
}

/// Maximum row/bound violation of `x`.
pub fn max_infeasibility(lp: &LinearProgram, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for row in &lp.rows {
        let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        let viol = match row.relation {
            Relation::Le => lhs - row.rhs,
            Relation::Ge => row.rhs - lhs,
            Relation::Eq => (lhs - row.rhs).abs(),
        };
        worst = worst.max(viol);
    }
    for (j, b) in lp.var_bounds.iter().enumerate() {
        worst = worst.max(b.lower - x[j]).max(x[j] - b.upper);
    }
    worst
}

/// Verify a Farkas certificate `mu` (one multiplier per row).
///
/// Convention: `mu_i >= 0` on `<=` rows, `mu_i <= 0` on `>=` rows, free on
/// equalities, so the aggregated row `w'x <= mu'rhs` with `w = sum_i mu_i a_i`
/// is implied by the row system. The certificate is valid when even the best
/// value of `w'x` over the variable box exceeds `mu'rhs`, i.e.
/// `min_box(w'x) - mu'rhs > tol`. Returns that positive margin.
pub fn check_farkas(lp: &LinearProgram, mu: &[f64], tol: f64) -> Result<f64, String> {
    if mu.len() != lp.rows.len() {
        return Err(format!(
            "certificate has {} multipliers for {} rows",
            mu.len(),
            lp.rows.len()
        ));
    }
    let scale = mu.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for (i, row) in lp.rows.iter().enumerate() {
        match row.relation {
            Relation::Le if mu[i] < -tol * scale => {
                return Err(format!("row {i} (<=) has negative multiplier {}", mu[i]));
            }
            Relation::Ge if mu[i] > tol * scale => {
                return Err(format!("row {i} (>=) has positive multiplier {}", mu[i]));
            }
            _ => {}
        }
    }
    let n = lp.n_vars();
    let mut w = vec![0.0; n];
    let mut rhs_agg = 0.0;
    for (i, row) in lp.rows.iter().enumerate() {
        if mu[i] == 0.0 {
            continue;
        }
        for (j, a) in row.coeffs.iter().enumerate() {
            w[j] += mu[i] * a;
        }
        rhs_agg += mu[i] * row.rhs;
    }
    // min of w'x over the variable box; positive coefficient on an unbounded
    // direction means the aggregation does not certify anything.
    let mut box_min = 0.0;
    let coeff_scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for (j, b) in lp.var_bounds.iter().enumerate() {
        let wj = if w[j].abs() <= tol * coeff_scale { 0.0 } else { w[j] };
        if wj > 0.0 {
            if b.lower.is_infinite() {
                return Err(format!("aggregated coefficient {wj} on variable {j} unbounded below"));
            }
            box_min += wj * b.lower;
        } else if wj < 0.0 {
            if b.upper.is_infinite() {
                return Err(format!("aggregated coefficient {wj} on variable {j} unbounded above"));
            }
            box_min += wj * b.upper;
        }
    }
    let margin = box_min - rhs_agg;
    if margin > tol * scale.max(rhs_agg.abs()) {
        Ok(margin)
    } else {
        Err(format!("certificate margin {margin} not positive"))
    }
}

/// Verify optimality of `sol` against its dual multipliers.
///
/// Checks dual feasibility (row dual signs per relation, reduced-cost signs
/// at variable bounds) and the duality gap `|c'x - (dual'rhs + d'x)| <=
/// tol * (1 + |c'x|)`. Dual feasibility is what makes `dual'rhs(.) + const`
/// a valid lower bound on the optimum for *any* right-hand side, which is
/// the property Benders cuts rely on.
pub fn check_duality_gap(lp: &LinearProgram, sol: &LpSolution, tol: f64) -> Result<(), String> {
    let x = sol.primal.as_ref().ok_or("no primal")?;
    let y = sol.dual.as_ref().ok_or("no dual")?;
    let primal_obj: f64 = lp.objective.iter().zip(x).map(|(c, v)| c * v).sum();
    let y_scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut dual_obj = 0.0;
    for (i, row) in lp.rows.iter().enumerate() {
        // min sense: <= rows take nonpositive duals, >= rows nonnegative.
        match row.relation {
            Relation::Le if y[i] > tol * y_scale => {
                return Err(format!("row {i} (<=) has positive dual {}", y[i]));
            }
            Relation::Ge if y[i] < -tol * y_scale => {
                return Err(format!("row {i} (>=) has negative dual {}", y[i]));
            }
            _ => {}
        }
        dual_obj += y[i] * row.rhs;
    }
    // reduced costs d = c - A'y; a variable away from both bounds must have
    // (near-)zero reduced cost, and bound contributions use the bound value.
    let c_scale = lp
        .objective
        .iter()
        .fold(1.0f64, |m, v| m.max(v.abs()))
        .max(y_scale);
    for j in 0..lp.n_vars() {
        let mut d = lp.objective[j];
        for (i, row) in lp.rows.iter().enumerate() {
            d -= y[i] * row.coeffs[j];
        }
        let b = lp.var_bounds[j];
        let at_lower = x[j] - b.lower <= tol * (1.0 + b.lower.abs());
        let at_upper = b.upper - x[j] <= tol * (1.0 + b.upper.abs());
        let d_tol = tol * c_scale * 10.0;
        if !at_lower && !at_upper && d.abs() > d_tol {
            return Err(format!("interior variable {j} has reduced cost {d}"));
        }
        if at_lower && !at_upper && d < -d_tol {
            return Err(format!("variable {j} at lower bound has reduced cost {d}"));
        }
        if at_upper && !at_lower && d > d_tol {
            return Err(format!("variable {j} at upper bound has reduced cost {d}"));
        }
        dual_obj += d * x[j];
    }
    let gap = (primal_obj - dual_obj).abs();
    if gap <= tol * (1.0 + primal_obj.abs()) {
        Ok(())
    } else {
        Err(format!("duality gap {gap} (primal {primal_obj}, dual {dual_obj})"))
    }
}
