//! Two-phase primal simplex over bounded variables, dense storage.
//!
//! Column layout: structural variables (dense columns), one slack per row,
//! one artificial per row. Slack and artificial columns are unit vectors and
//! are never materialized; pricing and column transforms special-case them.
//! The starting basis is a slack crash: rows whose slack can absorb the
//! initial residual start feasible, only the rest receive a basic artificial,
//! and phase 1 is skipped entirely when no artificial is needed.
//!
//! Pivot rule: Dantzig (largest reduced cost) with a switch to Bland's rule
//! after a streak of degenerate pivots, switching back once progress resumes.
//! The basis inverse is refactorized periodically and at phase ends. If
//! phase 1 terminates with a positive optimum, its duals (negated) form the
//! Farkas certificate.

use super::{
    check_duality_gap, check_farkas, max_infeasibility, LinearProgram, LpError, LpSolution,
    LpStatus, Relation, EPS_FEAS, EPS_PIVOT,
};

const EPS_DUAL: f64 = 1e-9;
const EPS_DEGENERATE: f64 = 1e-12;
/// ratio-test near-ties within this window resolve to the stablest pivot
const EPS_RATIO_TIE: f64 = 1e-10;
const BLAND_AFTER: usize = 60;
/// rebuild the basis inverse from scratch this often to shed pivot drift
const REFACTOR_EVERY: usize = 100;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    FreeZero,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    m: usize,
    /// structural variable count; slacks are n..n+m, artificials n+m..n+2m
    n: usize,
    ntot: usize,
    /// dense columns of the structural variables, each of length `m`
    cols: Vec<Vec<f64>>,
    /// artificial column signs, one per row
    art_sign: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    /// variable index occupying each row's basic slot
    basis: Vec<usize>,
    /// basis inverse, row-major m*m
    binv: Vec<f64>,
    rhs: Vec<f64>,
    needs_phase1: bool,
}

pub(super) fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let m = lp.rows.len();
    let n = lp.n_vars();
    let mut t = build_tableau(lp);
    let rhs_scale = t.rhs.iter().fold(1.0f64, |a, b| a.max(b.abs()));

    if t.needs_phase1 {
        let mut cost1 = vec![0.0; t.ntot];
        for j in n + m..t.ntot {
            cost1[j] = 1.0;
        }
        match t.run_phase(&cost1)? {
            PhaseOutcome::Unbounded => {
                return Err(LpError::NumericalFailure(
                    "phase 1 reported unbounded".into(),
                ));
            }
            PhaseOutcome::Optimal => {}
        }
        t.refactorize()?;
        let phase1_obj: f64 = (n + m..t.ntot).map(|j| t.x[j].abs()).sum();
        if phase1_obj > EPS_FEAS * rhs_scale {
            let y = t.duals(&cost1);
            let mu: Vec<f64> = y.iter().map(|v| -v).collect();
            check_farkas(lp, &mu, EPS_FEAS)
                .map_err(|e| LpError::NumericalFailure(format!("bad Farkas certificate: {e}")))?;
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                primal: None,
                dual: None,
                objective: None,
                farkas: Some(mu),
            });
        }
    }

    // Pin artificials at zero for phase 2; degenerate ones may stay basic.
    for j in n + m..t.ntot {
        t.lower[j] = 0.0;
        t.upper[j] = 0.0;
        if t.state[j] != State::Basic {
            t.x[j] = 0.0;
            t.state[j] = State::AtLower;
        } else if t.x[j].abs() <= EPS_FEAS * rhs_scale {
            t.x[j] = 0.0;
        }
    }

    let mut cost2 = vec![0.0; t.ntot];
    cost2[..n].copy_from_slice(&lp.objective);
    match t.run_phase(&cost2)? {
        PhaseOutcome::Unbounded => Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal: None,
            dual: None,
            objective: None,
            farkas: None,
        }),
        PhaseOutcome::Optimal => {
            t.refactorize()?;
            let primal: Vec<f64> = t.x[..n].to_vec();
            let dual = t.duals(&cost2);
            let obj: f64 = lp.objective.iter().zip(&primal).map(|(c, v)| c * v).sum();
            let sol = LpSolution {
                status: LpStatus::Optimal,
                primal: Some(primal),
                dual: Some(dual),
                objective: Some(obj + lp.objective_offset),
                farkas: None,
            };
            let infeas = max_infeasibility(lp, sol.primal_ref());
            if infeas > EPS_FEAS * rhs_scale.max(1.0) {
                return Err(LpError::NumericalFailure(format!(
                    "optimal point violates constraints by {infeas}"
                )));
            }
            check_duality_gap(lp, &sol, EPS_FEAS)
                .map_err(|e| LpError::NumericalFailure(format!("dual check failed: {e}")))?;
            Ok(sol)
        }
    }
}

fn build_tableau(lp: &LinearProgram) -> Tableau {
    let m = lp.rows.len();
    let n = lp.n_vars();
    let ntot = n + 2 * m;
    let mut cols = vec![vec![0.0; m]; n];
    let mut lower = vec![0.0; ntot];
    let mut upper = vec![0.0; ntot];

    for (j, col) in cols.iter_mut().enumerate() {
        for (i, row) in lp.rows.iter().enumerate() {
            col[i] = row.coeffs[j];
        }
        lower[j] = lp.var_bounds[j].lower;
        upper[j] = lp.var_bounds[j].upper;
    }
    // slack s_i makes row i an equality: a'x + s_i = rhs_i
    for (i, row) in lp.rows.iter().enumerate() {
        let (lo, up) = match row.relation {
            Relation::Le => (0.0, f64::INFINITY),
            Relation::Ge => (f64::NEG_INFINITY, 0.0),
            Relation::Eq => (0.0, 0.0),
        };
        lower[n + i] = lo;
        upper[n + i] = up;
    }

    // nonbasic start: finite bound nearest zero, or zero for free variables
    let mut x = vec![0.0; ntot];
    let mut state = vec![State::FreeZero; ntot];
    for j in 0..n + m {
        let (lo, up) = (lower[j], upper[j]);
        let s = match (lo.is_finite(), up.is_finite()) {
            (true, true) => {
                if lo.abs() <= up.abs() {
                    State::AtLower
                } else {
                    State::AtUpper
                }
            }
            (true, false) => State::AtLower,
            (false, true) => State::AtUpper,
            (false, false) => State::FreeZero,
        };
        x[j] = match s {
            State::AtLower => lo,
            State::AtUpper => up,
            _ => 0.0,
        };
        state[j] = s;
    }

    // slack crash basis: a slack that can hold the row residual starts
    // basic; otherwise the row gets a basic artificial
    let rhs: Vec<f64> = lp.rows.iter().map(|r| r.rhs).collect();
    let mut basis = vec![0usize; m];
    let mut binv = vec![0.0; m * m];
    let mut art_sign = vec![1.0; m];
    let mut needs_phase1 = false;
    for i in 0..m {
        let mut act = 0.0;
        for (j, col) in cols.iter().enumerate() {
            if x[j] != 0.0 {
                act += col[i] * x[j];
            }
        }
        let resid = rhs[i] - act;
        let slack_ok = match lp.rows[i].relation {
            Relation::Le => resid >= 0.0,
            Relation::Ge => resid <= 0.0,
            Relation::Eq => false,
        };
        let aj = n + m + i;
        if slack_ok {
            let sj = n + i;
            x[sj] = resid;
            state[sj] = State::Basic;
            basis[i] = sj;
            binv[i * m + i] = 1.0;
            // unused artificial: pin it so it can never enter
            lower[aj] = 0.0;
            upper[aj] = 0.0;
            x[aj] = 0.0;
            state[aj] = State::AtLower;
        } else {
            let sign = if resid >= 0.0 { 1.0 } else { -1.0 };
            art_sign[i] = sign;
            lower[aj] = 0.0;
            upper[aj] = f64::INFINITY;
            x[aj] = resid.abs();
            state[aj] = State::Basic;
            basis[i] = aj;
            binv[i * m + i] = sign;
            needs_phase1 = true;
        }
    }

    Tableau {
        m,
        n,
        ntot,
        cols,
        art_sign,
        lower,
        upper,
        x,
        state,
        basis,
        binv,
        rhs,
        needs_phase1,
    }
}

impl Tableau {
    /// Original column `j` of the equality system, materialized.
    fn column_into(&self, j: usize, out: &mut [f64]) {
        out.fill(0.0);
        if j < self.n {
            out.copy_from_slice(&self.cols[j]);
        } else if j < self.n + self.m {
            out[j - self.n] = 1.0;
        } else {
            let r = j - self.n - self.m;
            out[r] = self.art_sign[r];
        }
    }

    /// y' a_j without materializing unit columns.
    fn price(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            y.iter().zip(&self.cols[j]).map(|(a, b)| a * b).sum()
        } else if j < self.n + self.m {
            y[j - self.n]
        } else {
            let r = j - self.n - self.m;
            self.art_sign[r] * y[r]
        }
    }

    /// w = B^-1 a_j; unit columns reduce to a strided copy of `binv`.
    fn transformed_column(&self, j: usize, w: &mut [f64]) {
        let m = self.m;
        if j < self.n {
            let col = &self.cols[j];
            for (r, out) in w.iter_mut().enumerate() {
                let row = &self.binv[r * m..(r + 1) * m];
                let mut v = 0.0;
                for (a, b) in row.iter().zip(col) {
                    v += a * b;
                }
                *out = v;
            }
        } else if j < self.n + self.m {
            let i = j - self.n;
            for (r, out) in w.iter_mut().enumerate() {
                *out = self.binv[r * m + i];
            }
        } else {
            let i = j - self.n - self.m;
            let s = self.art_sign[i];
            for (r, out) in w.iter_mut().enumerate() {
                *out = s * self.binv[r * m + i];
            }
        }
    }

    /// Row duals for the given cost vector: y = cost_B' * B^-1.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (t, b) in y.iter_mut().zip(row) {
                    *t += cb * b;
                }
            }
        }
        y
    }

    /// Rebuild the basis inverse from the basis columns by Gauss-Jordan
    /// elimination with partial pivoting, then re-derive the basic values.
    /// Incremental pivot updates accumulate error; this resets it.
    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.m;
        if m == 0 {
            return Ok(());
        }
        let mut a = vec![0.0; m * m];
        let mut inv = vec![0.0; m * m];
        let mut buf = vec![0.0; m];
        for (r, &v) in self.basis.iter().enumerate() {
            self.column_into(v, &mut buf);
            for i in 0..m {
                a[i * m + r] = buf[i];
            }
        }
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let piv_row = (col..m)
                .max_by(|&i, &j| a[i * m + col].abs().total_cmp(&a[j * m + col].abs()))
                .expect("nonempty range");
            let piv = a[piv_row * m + col];
            if piv.abs() < EPS_PIVOT {
                return Err(LpError::NumericalFailure(format!(
                    "basis matrix singular at column {col} (pivot {piv})"
                )));
            }
            if piv_row != col {
                for k in 0..m {
                    a.swap(col * m + k, piv_row * m + k);
                    inv.swap(col * m + k, piv_row * m + k);
                }
            }
            let inv_piv = 1.0 / piv;
            for k in 0..m {
                a[col * m + k] *= inv_piv;
                inv[col * m + k] *= inv_piv;
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = a[i * m + col];
                if f != 0.0 {
                    for k in 0..m {
                        a[i * m + k] -= f * a[col * m + k];
                        inv[i * m + k] -= f * inv[col * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        self.recompute_basics();
        Ok(())
    }

    /// Re-derive basic values from the basis inverse to shed pivot drift:
    /// x_B = B^-1 (rhs - N x_N). Values a hair outside their bounds are
    /// snapped back so they cannot feed endless zero-ratio pivots; the final
    /// feasibility check still guards the returned solution.
    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut acc = self.rhs.clone();
        let basic_mask: Vec<bool> = {
            let mut mask = vec![false; self.ntot];
            for &v in &self.basis {
                mask[v] = true;
            }
            mask
        };
        for j in 0..self.ntot {
            if basic_mask[j] || self.x[j] == 0.0 {
                continue;
            }
            if j < self.n {
                for i in 0..m {
                    acc[i] -= self.cols[j][i] * self.x[j];
                }
            } else if j < self.n + self.m {
                acc[j - self.n] -= self.x[j];
            } else {
                let r = j - self.n - self.m;
                acc[r] -= self.art_sign[r] * self.x[j];
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            let mut v: f64 = row.iter().zip(&acc).map(|(a, b)| a * b).sum();
            let var = self.basis[r];
            let snap = EPS_FEAS * (1.0 + v.abs());
            if v < self.lower[var] && v > self.lower[var] - snap {
                v = self.lower[var];
            } else if v > self.upper[var] && v < self.upper[var] + snap {
                v = self.upper[var];
            }
            self.x[var] = v;
        }
    }

    fn run_phase(&mut self, cost: &[f64]) -> Result<PhaseOutcome, LpError> {
        let m = self.m;
        let max_pivots = 2000 + 20 * (m + self.ntot);
        let mut bland = false;
        let mut degenerate_streak = 0usize;
        let mut pivots_since_refactor = 0usize;
        let mut w = vec![0.0; m];

        for _ in 0..max_pivots {
            let y = self.duals(cost);

            // pricing
            let mut entering: Option<(usize, f64, f64)> = None; // (col, dir, |d|)
            for j in 0..self.ntot {
                if self.state[j] == State::Basic || self.lower[j] == self.upper[j] {
                    continue;
                }
                let d = cost[j] - self.price(&y, j);
                let dir = match self.state[j] {
                    State::AtLower if d < -EPS_DUAL => 1.0,
                    State::AtUpper if d > EPS_DUAL => -1.0,
                    State::FreeZero if d < -EPS_DUAL => 1.0,
                    State::FreeZero if d > EPS_DUAL => -1.0,
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir, d.abs()));
                    break; // lowest eligible index
                }
                if entering.map_or(true, |(_, _, best)| d.abs() > best) {
                    entering = Some((j, dir, d.abs()));
                }
            }
            let Some((jin, dir, _)) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };

            self.transformed_column(jin, &mut w);

            // ratio test: entering moves by t >= 0 in `dir`, basic i changes
            // by -dir*t*w[i]; also capped by the entering variable's own
            // range. Near-ties resolve to the largest pivot magnitude.
            let flip_cap = self.upper[jin] - self.lower[jin];
            let mut leave: Option<(usize, f64, bool, f64)> = None; // (row, ratio, to_upper, |w|)
            for i in 0..m {
                let delta = -dir * w[i];
                let v = self.basis[i];
                let (ratio, to_upper) = if delta > EPS_PIVOT {
                    if !self.upper[v].is_finite() {
                        continue;
                    }
                    (((self.upper[v] - self.x[v]) / delta).max(0.0), true)
                } else if delta < -EPS_PIVOT {
                    if !self.lower[v].is_finite() {
                        continue;
                    }
                    (((self.x[v] - self.lower[v]) / -delta).max(0.0), false)
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((li, lr, _, lw)) => {
                        if ratio < lr - EPS_RATIO_TIE {
                            true
                        } else if ratio > lr + EPS_RATIO_TIE {
                            false
                        } else if bland {
                            v < self.basis[li]
                        } else {
                            w[i].abs() > lw
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio, to_upper, w[i].abs()));
                }
            }

            let step = match leave {
                Some((_, r, _, _)) => r.min(flip_cap),
                None => flip_cap,
            };
            if !step.is_finite() {
                return Ok(PhaseOutcome::Unbounded);
            }

            // apply the step
            self.x[jin] += dir * step;
            if step > 0.0 {
                for i in 0..m {
                    let v = self.basis[i];
                    self.x[v] -= dir * step * w[i];
                }
            }

            let flipped = match leave {
                None => true,
                Some((_, r, _, _)) => flip_cap < r - EPS_DEGENERATE,
            };
            if flipped {
                // bound-to-bound move, basis unchanged
                self.state[jin] = match self.state[jin] {
                    State::AtLower => {
                        self.x[jin] = self.upper[jin];
                        State::AtUpper
                    }
                    State::AtUpper => {
                        self.x[jin] = self.lower[jin];
                        State::AtLower
                    }
                    s => s, // free variable cannot flip (infinite range)
                };
            } else {
                let (row, _, to_upper, _) = leave.expect("leaving row exists");
                let vout = self.basis[row];
                self.state[vout] = if to_upper { State::AtUpper } else { State::AtLower };
                self.x[vout] = if to_upper { self.upper[vout] } else { self.lower[vout] };
                self.basis[row] = jin;
                self.state[jin] = State::Basic;
                self.update_binv(row, &w)?;
                pivots_since_refactor += 1;
                if pivots_since_refactor >= REFACTOR_EVERY {
                    self.refactorize()?;
                    pivots_since_refactor = 0;
                }
            }

            if step <= EPS_DEGENERATE {
                degenerate_streak += 1;
                if degenerate_streak > BLAND_AFTER {
                    bland = true;
                }
            } else {
                degenerate_streak = 0;
                bland = false;
            }
        }
        Err(LpError::NumericalFailure(format!(
            "pivot limit reached ({max_pivots})"
        )))
    }

    fn update_binv(&mut self, row: usize, w: &[f64]) -> Result<(), LpError> {
        let m = self.m;
        let piv = w[row];
        if piv.abs() < EPS_PIVOT {
            return Err(LpError::NumericalFailure(format!(
                "pivot magnitude {} below tolerance",
                piv.abs()
            )));
        }
        let pivot_row: Vec<f64> = self.binv[row * m..(row + 1) * m]
            .iter()
            .map(|v| v / piv)
            .collect();
        for i in 0..m {
            if i == row || w[i] == 0.0 {
                continue;
            }
            let f = w[i];
            let dst = &mut self.binv[i * m..(i + 1) * m];
            for (d, p) in dst.iter_mut().zip(&pivot_row) {
                *d -= f * p;
            }
        }
        self.binv[row * m..(row + 1) * m].copy_from_slice(&pivot_row);
        Ok(())
    }
}
