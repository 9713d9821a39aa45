//! Two-stage potential-flow instances: a switched network with demand
//! adjustment in the first stage and per-scenario flow/overload recourse in
//! the second.

mod generate;
mod io;
mod subproblem;

pub use generate::{generate_instance, GenParams};
pub use io::{read_instance, write_instance};
pub use subproblem::{build_extensive_form, build_subproblem, first_stage_cost};
pub(crate) use subproblem::{instantiate_subproblem, scenario_lp, ScenarioLp};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("schema version mismatch: found {found}, expected {expected}")]
    SchemaVersionMismatch { found: u64, expected: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Directed network arc. Flow is signed, positive from `tail` to `head`, and
/// on an active arc equals `susceptance * (potential(tail) - potential(head))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub susceptance: f64,
    pub capacity: f64,
    pub switchable: bool,
    pub switch_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandNode {
    pub node: usize,
    pub base: f64,
    pub lo: f64,
    pub hi: f64,
    pub value_coeff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupplyNode {
    pub node: usize,
    pub max_injection: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Network {
    pub nodes: Vec<usize>,
    pub arcs: Vec<Arc>,
    pub demands: Vec<DemandNode>,
    pub supplies: Vec<SupplyNode>,
}

/// An outage scenario: the listed arcs (indices into `network.arcs`) are out
/// of service regardless of first-stage switching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: usize,
    pub outaged_arcs: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageInstance {
    pub name: String,
    pub seed: u64,
    pub overload_penalty: f64,
    pub network: Network,
    pub scenarios: Vec<Scenario>,
}

impl Network {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_arcs(&self) -> usize {
        self.arcs.len()
    }

    /// Index of a node id within `nodes`.
    pub fn node_index(&self, id: usize) -> Option<usize> {
        self.nodes.iter().position(|&n| n == id)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let err = |msg: String| Err(ModelError::InvalidInstance(msg));
        if self.nodes.is_empty() {
            return err("network has no nodes".into());
        }
        let mut seen = std::collections::HashSet::new();
        for &id in &self.nodes {
            if !seen.insert(id) {
                return err(format!("duplicate node id {id}"));
            }
        }
        for (i, a) in self.arcs.iter().enumerate() {
            if self.node_index(a.tail).is_none() || self.node_index(a.head).is_none() {
                return err(format!("arc {i} references unknown node"));
            }
            if a.tail == a.head {
                return err(format!("arc {i} is a self-loop at node {}", a.tail));
            }
            if !(a.susceptance > 0.0) {
                return err(format!("arc {i} has non-positive susceptance"));
            }
            if !(a.capacity > 0.0) {
                return err(format!("arc {i} has non-positive capacity"));
            }
            if a.switch_cost < 0.0 {
                return err(format!("arc {i} has negative switch cost"));
            }
        }
        let mut demand_nodes = std::collections::HashSet::new();
        for d in &self.demands {
            if self.node_index(d.node).is_none() {
                return err(format!("demand references unknown node {}", d.node));
            }
            if !demand_nodes.insert(d.node) {
                return err(format!("duplicate demand entry for node {}", d.node));
            }
            if d.lo > d.hi {
                return err(format!("demand at node {}: lo {} > hi {}", d.node, d.lo, d.hi));
            }
            if d.value_coeff < 0.0 {
                return err(format!("demand at node {} has negative value coefficient", d.node));
            }
        }
        let mut supply_nodes = std::collections::HashSet::new();
        for s in &self.supplies {
            if self.node_index(s.node).is_none() {
                return err(format!("supply references unknown node {}", s.node));
            }
            if !supply_nodes.insert(s.node) {
                return err(format!("duplicate supply entry for node {}", s.node));
            }
            if s.max_injection < 0.0 {
                return err(format!("supply at node {} has negative max injection", s.node));
            }
        }
        // connectivity over the undirected arc set
        if !self.arcs.is_empty() || self.nodes.len() > 1 {
            let n = self.nodes.len();
            let mut adj = vec![Vec::new(); n];
            for a in &self.arcs {
                let t = self.node_index(a.tail).unwrap();
                let h = self.node_index(a.head).unwrap();
                adj[t].push(h);
                adj[h].push(t);
            }
            let mut visited = vec![false; n];
            let mut stack = vec![0usize];
            visited[0] = true;
            let mut count = 1;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !visited[w] {
                        visited[w] = true;
                        count += 1;
                        stack.push(w);
                    }
                }
            }
            if count != n {
                return err(format!("network is disconnected ({count} of {n} nodes reachable)"));
            }
        }
        Ok(())
    }
}

impl TwoStageInstance {
    pub fn n_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.network.validate()?;
        let err = |msg: String| Err(ModelError::InvalidInstance(msg));
        if !(self.overload_penalty > 0.0) {
            return err("overload penalty must be positive".into());
        }
        if self.scenarios.is_empty() {
            return err("instance has no scenarios".into());
        }
        let mut ids = std::collections::HashSet::new();
        for sc in &self.scenarios {
            if !ids.insert(sc.id) {
                return err(format!("duplicate scenario id {}", sc.id));
            }
            if !(sc.weight > 0.0) {
                return err(format!("scenario {} has non-positive weight", sc.id));
            }
            if sc.outaged_arcs.len() > 2 {
                return err(format!("scenario {} outages {} arcs (max 2)", sc.id, sc.outaged_arcs.len()));
            }
            let mut seen = std::collections::HashSet::new();
            for &a in &sc.outaged_arcs {
                if a >= self.network.n_arcs() {
                    return err(format!("scenario {} outages unknown arc {a}", sc.id));
                }
                if !seen.insert(a) {
                    return err(format!("scenario {} lists arc {a} twice", sc.id));
                }
            }
        }
        Ok(())
    }
}

/// Column layout of the master variable space: switch decisions `z` (one per
/// switchable arc, ascending arc index), demand adjustments `b` (in
/// `network.demands` order), then one recourse variable theta per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterSpace {
    pub switchable_arcs: Vec<usize>,
    pub n_b: usize,
    pub n_scenarios: usize,
}

impl MasterSpace {
    pub fn of(inst: &TwoStageInstance) -> Self {
        let switchable_arcs = inst
            .network
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.switchable)
            .map(|(i, _)| i)
            .collect();
        MasterSpace {
            switchable_arcs,
            n_b: inst.network.demands.len(),
            n_scenarios: inst.scenarios.len(),
        }
    }

    pub fn n_z(&self) -> usize {
        self.switchable_arcs.len()
    }

    /// z and b columns only (the part subproblem right-hand sides depend on).
    pub fn zb_dim(&self) -> usize {
        self.n_z() + self.n_b
    }

    pub fn dim(&self) -> usize {
        self.zb_dim() + self.n_scenarios
    }

    pub fn z_col(&self, k: usize) -> usize {
        debug_assert!(k < self.n_z());
        k
    }

    pub fn b_col(&self, k: usize) -> usize {
        debug_assert!(k < self.n_b);
        self.n_z() + k
    }

    pub fn theta_col(&self, s: usize) -> usize {
        debug_assert!(s < self.n_scenarios);
        self.zb_dim() + s
    }

    /// Master z-column of the given arc, if it is switchable.
    pub fn z_col_of_arc(&self, arc: usize) -> Option<usize> {
        self.switchable_arcs.iter().position(|&a| a == arc)
    }
}

/// First-stage decisions plus the master's recourse estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStageAssignment {
    /// switch state per switchable arc (true = active), in `MasterSpace` order
    pub z: Vec<bool>,
    /// demand served per demand node
    pub b: Vec<f64>,
    /// master recourse estimate per scenario
    pub theta: Vec<f64>,
}

/// Two nodes, one arc from a supply to a fixed demand; the smallest instance
/// with interesting overload/feasibility behavior. Test-only.
#[cfg(test)]
pub(crate) fn subproblem_test_fixture(
    capacity: f64,
    demand: f64,
    penalty: f64,
) -> TwoStageInstance {
    TwoStageInstance {
        name: "two-node".into(),
        seed: 0,
        overload_penalty: penalty,
        network: Network {
            nodes: vec![0, 1],
            arcs: vec![Arc {
                tail: 0,
                head: 1,
                susceptance: 1.0,
                capacity,
                switchable: false,
                switch_cost: 0.0,
            }],
            demands: vec![DemandNode {
                node: 1,
                base: demand,
                lo: demand,
                hi: demand,
                value_coeff: 0.0,
            }],
            supplies: vec![SupplyNode { node: 0, max_injection: demand + 10.0 }],
        },
        scenarios: vec![Scenario { id: 0, outaged_arcs: vec![], weight: 1.0 }],
    }
}

impl FirstStageAssignment {
    pub fn from_master_point(space: &MasterSpace, x: &[f64]) -> Self {
        debug_assert_eq!(x.len(), space.dim());
        FirstStageAssignment {
            z: (0..space.n_z()).map(|k| x[space.z_col(k)] > 0.5).collect(),
            b: (0..space.n_b).map(|k| x[space.b_col(k)]).collect(),
            theta: (0..space.n_scenarios).map(|s| x[space.theta_col(s)]).collect(),
        }
    }

    /// The (z, b) prefix as numbers, the coordinates subproblem right-hand
    /// sides are affine in.
    pub fn zb_vector(&self) -> Vec<f64> {
        self.z
            .iter()
            .map(|&on| if on { 1.0 } else { 0.0 })
            .chain(self.b.iter().copied())
            .collect()
    }

    pub fn validate(&self, inst: &TwoStageInstance) -> Result<(), ModelError> {
        let space = MasterSpace::of(inst);
        if self.z.len() != space.n_z() || self.b.len() != space.n_b {
            return Err(ModelError::InvalidInstance(format!(
                "assignment dimensions ({}, {}) do not match instance ({}, {})",
                self.z.len(),
                self.b.len(),
                space.n_z(),
                space.n_b
            )));
        }
        for (d, &bv) in inst.network.demands.iter().zip(&self.b) {
            if bv < d.lo - 1e-9 || bv > d.hi + 1e-9 {
                return Err(ModelError::InvalidInstance(format!(
                    "demand at node {} set to {bv}, outside [{}, {}]",
                    d.node, d.lo, d.hi
                )));
            }
        }
        if self.theta.iter().any(|&t| t < -1e-9) {
            return Err(ModelError::InvalidInstance("negative recourse estimate".into()));
        }
        Ok(())
    }
}
