//! Second-stage LP construction.
//!
//! Every row is stored as `a'y (rel) h + t'(z, b)`, with the first-stage
//! dependence isolated in the sparse `t` part. The same row set instantiates
//! three things: the scenario subproblem at a fixed first stage (rhs = h +
//! t'x), the scenario block of the extensive form (move `-t` onto the z/b
//! columns), and Benders cut coefficients (dual-weighted sums of `t`).

use super::{FirstStageAssignment, MasterSpace, TwoStageInstance};
use crate::lp::{LinearProgram, Relation, VarBounds, VarKind};

/// Second-stage variable layout per scenario: node potentials, arc flows,
/// arc overload slacks, then supply injections.
pub(crate) struct ScenarioLp {
    pub n_y: usize,
    pub objective: Vec<f64>,
    pub bounds: Vec<VarBounds>,
    pub rows: Vec<SubRow>,
}

pub(crate) struct SubRow {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub h: f64,
    /// first-stage dependence of the rhs, sparse over master z/b columns
    pub t: Vec<(usize, f64)>,
}

struct Layout {
    n_nodes: usize,
    n_arcs: usize,
}

impl Layout {
    fn pi(&self, v: usize) -> usize {
        v
    }
    fn flow(&self, a: usize) -> usize {
        self.n_nodes + a
    }
    fn slack(&self, a: usize) -> usize {
        self.n_nodes + self.n_arcs + a
    }
    fn injection(&self, k: usize) -> usize {
        self.n_nodes + 2 * self.n_arcs + k
    }
}

/// Big-M constants making switch decisions pure right-hand-side data.
/// `flow_cap` bounds |flow| on an active switchable arc; `band * susceptance`
/// bounds the potential mismatch a switched-off arc must tolerate. Any
/// balanced flow carries at most the total demand-plus-supply flux per arc,
/// and potential spreads are path sums of flow/susceptance, which bounds both
/// constants; the factor 2 is slack, kept small to protect the simplex's
/// conditioning.
fn switching_constants(inst: &TwoStageInstance) -> (f64, f64) {
    let net = &inst.network;
    let flux: f64 = net.demands.iter().map(|d| d.hi).sum::<f64>()
        + net.supplies.iter().map(|s| s.max_injection).sum::<f64>()
        + 1.0;
    let beta_min = net
        .arcs
        .iter()
        .map(|a| a.susceptance)
        .fold(f64::INFINITY, f64::min)
        .max(1e-6);
    let flow_cap = 2.0 * flux;
    let band = 2.0 * net.n_nodes() as f64 * flux / beta_min;
    (flow_cap, band)
}

pub(crate) fn scenario_lp(inst: &TwoStageInstance, scenario_idx: usize) -> ScenarioLp {
    let net = &inst.network;
    let space = MasterSpace::of(inst);
    let scenario = &inst.scenarios[scenario_idx];
    let lay = Layout { n_nodes: net.n_nodes(), n_arcs: net.n_arcs() };
    let n_y = net.n_nodes() + 2 * net.n_arcs() + net.supplies.len();
    let (flow_cap, band) = switching_constants(inst);

    let mut objective = vec![0.0; n_y];
    let mut bounds = vec![VarBounds { lower: f64::NEG_INFINITY, upper: f64::INFINITY }; n_y];
    // potentials float except the reference at the lowest-index node
    bounds[lay.pi(0)] = VarBounds { lower: 0.0, upper: 0.0 };
    for a in 0..net.n_arcs() {
        bounds[lay.slack(a)] = VarBounds { lower: 0.0, upper: f64::INFINITY };
        objective[lay.slack(a)] = inst.overload_penalty;
    }
    for (k, s) in net.supplies.iter().enumerate() {
        bounds[lay.injection(k)] = VarBounds { lower: 0.0, upper: s.max_injection };
    }

    let mut rows = Vec::new();

    // node balance: inflow - outflow + injection = served demand
    for (v, &node_id) in net.nodes.iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for (a, arc) in net.arcs.iter().enumerate() {
            if net.node_index(arc.head) == Some(v) {
                coeffs.push((lay.flow(a), 1.0));
            } else if net.node_index(arc.tail) == Some(v) {
                coeffs.push((lay.flow(a), -1.0));
            }
        }
        if let Some(k) = net.supplies.iter().position(|s| s.node == node_id) {
            coeffs.push((lay.injection(k), 1.0));
        }
        let mut t = Vec::new();
        if let Some(k) = net.demands.iter().position(|d| d.node == node_id) {
            t.push((space.b_col(k), 1.0));
        }
        rows.push(SubRow { coeffs, relation: Relation::Eq, h: 0.0, t });
    }

    for (a, arc) in net.arcs.iter().enumerate() {
        let ti = net.node_index(arc.tail).unwrap();
        let hi = net.node_index(arc.head).unwrap();
        let beta = arc.susceptance;
        let outaged = scenario.outaged_arcs.contains(&a);
        if outaged {
            rows.push(SubRow {
                coeffs: vec![(lay.flow(a), 1.0)],
                relation: Relation::Eq,
                h: 0.0,
                t: Vec::new(),
            });
            continue;
        }
        let coupling = vec![(lay.flow(a), 1.0), (lay.pi(ti), -beta), (lay.pi(hi), beta)];
        let coupling_neg: Vec<(usize, f64)> =
            coupling.iter().map(|&(c, v)| (c, -v)).collect();
        match space.z_col_of_arc(a) {
            Some(zc) => {
                // |flow - beta * dpi| <= M (1 - z), |flow| <= flow_cap * z
                let m = beta * band;
                rows.push(SubRow {
                    coeffs: coupling,
                    relation: Relation::Le,
                    h: m,
                    t: vec![(zc, -m)],
                });
                rows.push(SubRow {
                    coeffs: coupling_neg,
                    relation: Relation::Le,
                    h: m,
                    t: vec![(zc, -m)],
                });
                rows.push(SubRow {
                    coeffs: vec![(lay.flow(a), 1.0)],
                    relation: Relation::Le,
                    h: 0.0,
                    t: vec![(zc, flow_cap)],
                });
                rows.push(SubRow {
                    coeffs: vec![(lay.flow(a), -1.0)],
                    relation: Relation::Le,
                    h: 0.0,
                    t: vec![(zc, flow_cap)],
                });
            }
            None => {
                rows.push(SubRow { coeffs: coupling, relation: Relation::Eq, h: 0.0, t: Vec::new() });
            }
        }
        // soft capacity: |flow| <= capacity + overload slack
        rows.push(SubRow {
            coeffs: vec![(lay.flow(a), 1.0), (lay.slack(a), -1.0)],
            relation: Relation::Le,
            h: arc.capacity,
            t: Vec::new(),
        });
        rows.push(SubRow {
            coeffs: vec![(lay.flow(a), -1.0), (lay.slack(a), -1.0)],
            relation: Relation::Le,
            h: arc.capacity,
            t: Vec::new(),
        });
    }

    ScenarioLp { n_y, objective, bounds, rows }
}

/// Instantiate the scenario LP at a concrete (z, b) prefix.
pub(crate) fn instantiate_subproblem(sl: &ScenarioLp, zb: &[f64]) -> LinearProgram {
    let mut lp = LinearProgram::new(sl.n_y);
    lp.objective = sl.objective.clone();
    lp.var_bounds = sl.bounds.clone();
    for row in &sl.rows {
        let mut coeffs = vec![0.0; sl.n_y];
        for &(c, v) in &row.coeffs {
            coeffs[c] = v;
        }
        let rhs = row.h + row.t.iter().map(|&(c, v)| v * zb[c]).sum::<f64>();
        lp.add_row(coeffs, row.relation, rhs);
    }
    lp
}

/// Second-stage LP of one scenario with the first stage fixed. Optimal value
/// is that scenario's (unweighted) overload cost; infeasibility means the
/// fixed first stage cannot balance the scenario at all.
pub fn build_subproblem(
    inst: &TwoStageInstance,
    scenario_idx: usize,
    fixed: &FirstStageAssignment,
) -> LinearProgram {
    let sl = scenario_lp(inst, scenario_idx);
    instantiate_subproblem(&sl, &fixed.zb_vector())
}

/// First-stage cost: paying to switch arcs off plus the value of demand left
/// unserved below its maximum.
pub fn first_stage_cost(inst: &TwoStageInstance, z: &[bool], b: &[f64]) -> f64 {
    let space = MasterSpace::of(inst);
    debug_assert_eq!(z.len(), space.n_z());
    debug_assert_eq!(b.len(), space.n_b);
    let mut cost = 0.0;
    for (k, &arc) in space.switchable_arcs.iter().enumerate() {
        if !z[k] {
            cost += inst.network.arcs[arc].switch_cost;
        }
    }
    for (d, &bv) in inst.network.demands.iter().zip(b) {
        cost += d.value_coeff * (d.hi - bv);
    }
    cost
}

/// Deterministic equivalent: one copy of the second stage per scenario,
/// first-stage variables shared. Its binary optimum is the ground truth every
/// Benders configuration must reproduce.
pub fn build_extensive_form(inst: &TwoStageInstance) -> LinearProgram {
    let net = &inst.network;
    let space = MasterSpace::of(inst);
    let scen_lps: Vec<ScenarioLp> =
        (0..inst.n_scenarios()).map(|s| scenario_lp(inst, s)).collect();
    let n_master = space.zb_dim();
    let n_total = n_master + scen_lps.iter().map(|s| s.n_y).sum::<usize>();

    let mut lp = LinearProgram::new(n_total);
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

    let mut offset = n_master;
    for (s, sl) in scen_lps.iter().enumerate() {
        let weight = inst.scenarios[s].weight;
        for j in 0..sl.n_y {
            lp.objective[offset + j] = weight * sl.objective[j];
            lp.var_bounds[offset + j] = sl.bounds[j];
        }
        for row in &sl.rows {
            let mut coeffs = vec![0.0; n_total];
            for &(c, v) in &row.coeffs {
                coeffs[offset + c] = v;
            }
            for &(c, v) in &row.t {
                coeffs[c] = -v;
            }
            lp.add_row(coeffs, row.relation, row.h);
        }
        offset += sl.n_y;
    }
    lp
}
