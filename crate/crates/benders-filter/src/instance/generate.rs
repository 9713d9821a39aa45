//! Random instance generator: a random spanning tree plus extra arcs,
//! randomized susceptances, capacities, demands and supplies, and outage
//! scenarios sampled without replacement from the non-switchable arcs.
//! Fully determined by the seed.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::{Arc, DemandNode, ModelError, Network, Scenario, SupplyNode, TwoStageInstance};

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub n_nodes: usize,
    pub n_arcs: usize,
    pub n_switchable: usize,
    pub n_scenarios: usize,
    /// arcs outaged per scenario, 1 or 2
    pub outage_size: usize,
    pub seed: u64,
}

fn n_choose(n: usize, k: usize) -> usize {
    match k {
        1 => n,
        2 => n * n.saturating_sub(1) / 2,
        _ => 0,
    }
}

impl GenParams {
    fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: String| Err(ModelError::InvalidParams(msg));
        if self.n_nodes < 2 {
            return fail(format!("n_nodes must be at least 2, got {}", self.n_nodes));
        }
        if self.n_arcs < self.n_nodes - 1 {
            return fail(format!(
                "n_arcs {} below spanning-tree minimum {}",
                self.n_arcs,
                self.n_nodes - 1
            ));
        }
        if self.n_arcs > self.n_nodes * (self.n_nodes - 1) / 2 {
            return fail(format!(
                "n_arcs {} exceeds simple-graph maximum {}",
                self.n_arcs,
                self.n_nodes * (self.n_nodes - 1) / 2
            ));
        }
        if self.outage_size != 1 && self.outage_size != 2 {
            return fail(format!("outage_size must be 1 or 2, got {}", self.outage_size));
        }
        if self.n_switchable > self.n_arcs {
            return fail(format!(
                "n_switchable {} exceeds n_arcs {}",
                self.n_switchable, self.n_arcs
            ));
        }
        if self.n_scenarios == 0 {
            return fail("n_scenarios must be positive".into());
        }
        // outages draw from non-switchable arcs only, without replacement
        let available = n_choose(self.n_arcs - self.n_switchable, self.outage_size);
        if self.n_scenarios > available {
            return fail(format!(
                "n_scenarios {} exceeds the {} distinct outage sets over {} non-switchable arcs",
                self.n_scenarios,
                available,
                self.n_arcs - self.n_switchable
            ));
        }
        Ok(())
    }
}

pub fn generate_instance(params: GenParams) -> Result<TwoStageInstance, ModelError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n_nodes;

    // spanning tree, then extra arcs sampled from the unused node pairs
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut used = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        pairs.push((u, v));
        used.insert((u, v));
    }
    let free_pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|p| !used.contains(p))
        .collect();
    let n_extra = params.n_arcs - (n - 1);
    let mut chosen = rand::seq::index::sample(&mut rng, free_pairs.len(), n_extra).into_vec();
    chosen.sort_unstable();
    for idx in chosen {
        pairs.push(free_pairs[idx]);
    }
    // random orientation for the extra arcs keeps flow signs interesting
    let pairs: Vec<(usize, usize)> = pairs
        .into_iter()
        .map(|(u, v)| if rng.gen_bool(0.5) { (u, v) } else { (v, u) })
        .collect();

    let susceptances: Vec<f64> = (0..params.n_arcs).map(|_| rng.gen_range(0.5..2.0)).collect();

    let mut switchable = vec![false; params.n_arcs];
    let mut sw = rand::seq::index::sample(&mut rng, params.n_arcs, params.n_switchable).into_vec();
    sw.sort_unstable();
    for a in &sw {
        switchable[*a] = true;
    }
    let switch_costs: Vec<f64> = switchable
        .iter()
        .map(|&s| if s { rng.gen_range(0.5..2.5) } else { 0.0 })
        .collect();

    let n_supply = (n / 4).max(1);
    let mut supply_nodes = rand::seq::index::sample(&mut rng, n, n_supply).into_vec();
    supply_nodes.sort_unstable();
    let demand_candidates: Vec<usize> =
        (0..n).filter(|v| !supply_nodes.contains(v)).collect();
    let n_demand = (demand_candidates.len() / 2).max(1);
    let mut dsel = rand::seq::index::sample(&mut rng, demand_candidates.len(), n_demand).into_vec();
    dsel.sort_unstable();

    let mut demands = Vec::with_capacity(n_demand);
    for idx in dsel {
        let node = demand_candidates[idx];
        let base = rng.gen_range(1.0..5.0);
        let lo = if rng.gen_bool(0.5) { 0.0 } else { base * rng.gen_range(0.2..0.6) };
        let hi = base * rng.gen_range(1.0..1.3);
        let value_coeff = rng.gen_range(5.0..15.0);
        demands.push(DemandNode { node, base, lo, hi, value_coeff });
    }
    let total_hi: f64 = demands.iter().map(|d| d.hi).sum();

    let supplies: Vec<SupplyNode> = supply_nodes
        .iter()
        .map(|&node| SupplyNode {
            node,
            max_injection: total_hi * 1.3 / n_supply as f64 * rng.gen_range(0.8..1.3),
        })
        .collect();

    let cap_scale = total_hi / (params.n_arcs as f64).sqrt();
    let arcs: Vec<Arc> = pairs
        .iter()
        .enumerate()
        .map(|(a, &(tail, head))| Arc {
            tail,
            head,
            susceptance: susceptances[a],
            capacity: cap_scale * rng.gen_range(0.4..1.6),
            switchable: switchable[a],
            switch_cost: switch_costs[a],
        })
        .collect();

    let overload_penalty = rng.gen_range(10.0..30.0);

    let non_switchable: Vec<usize> = (0..params.n_arcs).filter(|&a| !switchable[a]).collect();
    let outage_sets: Vec<Vec<usize>> = match params.outage_size {
        1 => non_switchable.iter().map(|&a| vec![a]).collect(),
        _ => {
            let mut sets = Vec::new();
            for i in 0..non_switchable.len() {
                for j in (i + 1)..non_switchable.len() {
                    sets.push(vec![non_switchable[i], non_switchable[j]]);
                }
            }
            sets
        }
    };
    let mut pick = rand::seq::index::sample(&mut rng, outage_sets.len(), params.n_scenarios).into_vec();
    pick.sort_unstable();
    let weight = 1.0 / params.n_scenarios as f64;
    let scenarios: Vec<Scenario> = pick
        .iter()
        .enumerate()
        .map(|(id, &k)| Scenario { id, outaged_arcs: outage_sets[k].clone(), weight })
        .collect();

    let inst = TwoStageInstance {
        name: format!("inst_{}", params.seed),
        seed: params.seed,
        overload_penalty,
        network: Network { nodes: (0..n).collect(), arcs, demands, supplies },
        scenarios,
    };
    inst.validate()?;
    Ok(inst)
}
