//! Performance profiles: per configuration, the fraction of instances solved
//! within a factor tau of the per-instance best time.

use super::ConfigRunTable;

/// Stepwise curves, one per configuration, as `(tau, fraction)` points at
/// every finite ratio the configuration attains. Unsolved runs carry an
/// infinite ratio, so their curves plateau below 1.
pub fn performance_profile(table: &ConfigRunTable) -> Vec<(String, Vec<(f64, f64)>)> {
    let configs = table.configs();
    let instances = table.instances();
    if instances.is_empty() {
        return configs.into_iter().map(|c| (c, Vec::new())).collect();
    }

    // best solved time per instance
    let mut ratios: Vec<Vec<f64>> = vec![Vec::new(); configs.len()];
    for inst in &instances {
        let best = configs
            .iter()
            .filter_map(|c| table.get(inst, c).filter(|r| r.solved()).map(|r| r.time_s))
            .fold(f64::INFINITY, f64::min);
        for (k, c) in configs.iter().enumerate() {
            let ratio = match table.get(inst, c) {
                Some(r) if r.solved() && best.is_finite() => {
                    if best > 0.0 {
                        r.time_s / best
                    } else if r.time_s == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                }
                _ => f64::INFINITY,
            };
            ratios[k].push(ratio);
        }
    }

    let n = instances.len() as f64;
    configs
        .into_iter()
        .zip(ratios)
        .map(|(config, mut rs)| {
            rs.sort_by(|a, b| a.total_cmp(b));
            let mut curve: Vec<(f64, f64)> = Vec::new();
            for (i, &r) in rs.iter().enumerate() {
                if !r.is_finite() {
                    break;
                }
                let frac = (i + 1) as f64 / n;
                match curve.last_mut() {
                    Some(last) if last.0 == r => last.1 = frac,
                    _ => curve.push((r, frac)),
                }
            }
            (config, curve)
        })
        .collect()
}
