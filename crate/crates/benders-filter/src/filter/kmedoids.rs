//! k-medoids clustering under cosine distance.
//!
//! Small pools (at most [`EXACT_THRESHOLD`] items) are clustered exactly by
//! enumerating every k-subset of medoids; larger pools use deterministic PAM
//! (greedy BUILD, then best-improvement SWAP until no swap helps). Both tie
//! rules are fixed: equal-objective medoid sets resolve to the
//! lexicographically smallest index set, and assignment ties go to the
//! medoid with the lower item index.

use itertools::Itertools;

use super::FilterError;

/// Pool size up to which the medoid set is globally optimal.
pub const EXACT_THRESHOLD: usize = 10;

const EPS_NORM: f64 = 1e-12;
const EPS_IMPROVE: f64 = 1e-12;

/// `1 - cos(angle)` between coefficient vectors: 0 for parallel, 1 for
/// orthogonal, 2 for anti-parallel. Clamped against floating-point overshoot.
pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64, FilterError> {
    if a.len() != b.len() {
        return Err(FilterError::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let (mut dot, mut na2, mut nb2) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na2 += x * x;
        nb2 += y * y;
    }
    if na2 <= EPS_NORM * EPS_NORM || nb2 <= EPS_NORM * EPS_NORM {
        return Err(FilterError::ZeroNormVector);
    }
    // single square root keeps exactly-(anti)parallel pairs exact
    Ok((1.0 - dot / (na2 * nb2).sqrt()).clamp(0.0, 2.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// item indices of the chosen medoids, ascending
    pub medoids: Vec<usize>,
    /// per item: position of its medoid within `medoids`
    pub assignment: Vec<usize>,
    /// sum of item-to-medoid distances
    pub objective: f64,
}

impl Clustering {
    /// Item indices of cluster `c`, ascending.
    pub fn members(&self, c: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == c)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn k(&self) -> usize {
        self.medoids.len()
    }
}

/// Partition `items` into `k` clusters minimizing total within-cluster cosine
/// distance to the medoids. The `_seed` parameter is accepted for interface
/// stability; this variant is fully deterministic and does not use it.
pub fn k_medoids(items: &[Vec<f64>], k: usize, _seed: u64) -> Result<Clustering, FilterError> {
    let n = items.len();
    if k == 0 || k > n {
        return Err(FilterError::InvalidK { k, n });
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = cosine_distance(&items[i], &items[j])?;
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    let medoids = if n <= EXACT_THRESHOLD {
        exact_medoids(&dist, n, k)
    } else {
        pam_medoids(&dist, n, k)
    };
    Ok(assemble(&dist, n, medoids))
}

fn objective_for(dist: &[f64], n: usize, medoids: &[usize]) -> f64 {
    (0..n)
        .map(|i| {
            medoids
                .iter()
                .map(|&m| dist[i * n + m])
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Exhaustive search over all k-subsets (lexicographic order, strict
/// improvement), so ties resolve to the lexicographically smallest set.
fn exact_medoids(dist: &[f64], n: usize, k: usize) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in (0..n).combinations(k) {
        let obj = objective_for(dist, n, &subset);
        if best.as_ref().map_or(true, |(b, _)| obj < *b) {
            best = Some((obj, subset));
        }
    }
    best.expect("at least one subset").1
}

/// Greedy BUILD followed by best-improvement SWAP.
fn pam_medoids(dist: &[f64], n: usize, k: usize) -> Vec<usize> {
    // BUILD: start from the 1-medoid optimum, then greedily add the item
    // that reduces the objective most (ties to the lowest index).
    let first = (0..n)
        .min_by(|&a, &b| {
            let sa: f64 = (0..n).map(|i| dist[i * n + a]).sum();
            let sb: f64 = (0..n).map(|i| dist[i * n + b]).sum();
            sa.total_cmp(&sb)
        })
        .expect("nonempty");
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = (0..n).map(|i| dist[i * n + first]).collect();
    while medoids.len() < k {
        let mut best: Option<(f64, usize)> = None;
        for c in 0..n {
            if medoids.contains(&c) {
                continue;
            }
            let obj: f64 = (0..n).map(|i| nearest[i].min(dist[i * n + c])).sum();
            if best.as_ref().map_or(true, |(b, _)| obj < *b - EPS_IMPROVE) {
                best = Some((obj, c));
            }
        }
        let (_, c) = best.expect("k <= n leaves a candidate");
        for i in 0..n {
            nearest[i] = nearest[i].min(dist[i * n + c]);
        }
        medoids.push(c);
        medoids.sort_unstable();
    }

    // SWAP to a local optimum; first strictly-best pair in scan order wins.
    let mut obj = objective_for(dist, n, &medoids);
    for _ in 0..200 {
        let mut best: Option<(f64, usize, usize)> = None; // (obj, medoid pos, candidate)
        for pos in 0..medoids.len() {
            for c in 0..n {
                if medoids.contains(&c) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[pos] = c;
                let t = objective_for(dist, n, &trial);
                if t < obj - EPS_IMPROVE && best.as_ref().map_or(true, |(b, _, _)| t < *b - EPS_IMPROVE) {
                    best = Some((t, pos, c));
                }
            }
        }
        match best {
            Some((t, pos, c)) => {
                medoids[pos] = c;
                medoids.sort_unstable();
                obj = t;
            }
            None => break,
        }
    }
    medoids
}

fn assemble(dist: &[f64], n: usize, mut medoids: Vec<usize>) -> Clustering {
    medoids.sort_unstable();
    let assignment: Vec<usize> = (0..n)
        .map(|i| {
            let mut best = 0usize;
            for (pos, &m) in medoids.iter().enumerate() {
                // strict improvement keeps the lowest medoid index on ties
                if dist[i * n + m] < dist[i * n + medoids[best]] {
                    best = pos;
                }
            }
            best
        })
        .collect();
    let objective = (0..n).map(|i| dist[i * n + medoids[assignment[i]]]).sum();
    Clustering { medoids, assignment, objective }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_reference_points() {
        assert_eq!(cosine_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(cosine_distance(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 0.0);
        assert_eq!(cosine_distance(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn cosine_zero_norm_rejected() {
        assert!(matches!(
            cosine_distance(&[0.0, 0.0], &[1.0, 0.0]),
            Err(FilterError::ZeroNormVector)
        ));
    }

    #[test]
    fn two_obvious_clusters() {
        let items = vec![
            vec![1.0, 0.0],
            vec![1.0, 0.01],
            vec![0.0, 1.0],
            vec![0.01, 1.0],
        ];
        let c = k_medoids(&items, 2, 0).unwrap();
        assert_eq!(c.assignment[0], c.assignment[1]);
        assert_eq!(c.assignment[2], c.assignment[3]);
        assert_ne!(c.assignment[0], c.assignment[2]);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let items: Vec<Vec<f64>> = (0..5)
            .map(|i| vec![(i as f64 * 0.7).cos(), (i as f64 * 0.7).sin()])
            .collect();
        let c = k_medoids(&items, 5, 0).unwrap();
        assert_eq!(c.medoids, vec![0, 1, 2, 3, 4]);
        assert_eq!(c.objective, 0.0);
    }

    #[test]
    fn k_one_matches_linear_scan() {
        let items: Vec<Vec<f64>> = (0..7)
            .map(|i| vec![1.0, i as f64 * 0.3 - 1.0])
            .collect();
        let c = k_medoids(&items, 1, 0).unwrap();
        // independent linear scan for the 1-medoid optimum
        let mut best = (f64::INFINITY, usize::MAX);
        for m in 0..items.len() {
            let total: f64 = items
                .iter()
                .map(|it| cosine_distance(it, &items[m]).unwrap())
                .sum();
            if total < best.0 {
                best = (total, m);
            }
        }
        assert_eq!(c.medoids, vec![best.1]);
        assert!((c.objective - best.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_k_rejected() {
        let items = vec![vec![1.0], vec![2.0]];
        assert!(matches!(k_medoids(&items, 0, 0), Err(FilterError::InvalidK { .. })));
        assert!(matches!(k_medoids(&items, 3, 0), Err(FilterError::InvalidK { .. })));
    }

    #[test]
    fn pam_path_is_deterministic_and_sane() {
        // 14 items in three directional groups forces the PAM path
        let mut items = Vec::new();
        for i in 0..14 {
            let angle = match i % 3 {
                0 => 0.05 * i as f64,
                1 => 1.5 + 0.05 * i as f64,
                _ => 3.0 + 0.05 * i as f64,
            };
            items.push(vec![angle.cos(), angle.sin()]);
        }
        let a = k_medoids(&items, 3, 0).unwrap();
        let b = k_medoids(&items, 3, 1).unwrap();
        assert_eq!(a, b, "seed must not change the deterministic variant");
        assert_eq!(a.k(), 3);
        // local optimum: no single-medoid swap improves the objective
        for pos in 0..3 {
            for c in 0..items.len() {
                if a.medoids.contains(&c) {
                    continue;
                }
                let mut trial = a.medoids.clone();
                trial[pos] = c;
                let obj = objective_for(
                    &{
                        let n = items.len();
                        let mut d = vec![0.0; n * n];
                        for i in 0..n {
                            for j in 0..n {
                                d[i * n + j] = cosine_distance(&items[i], &items[j]).unwrap();
                            }
                        }
                        d
                    },
                    items.len(),
                    &trial,
                );
                assert!(obj >= a.objective - 1e-9);
            }
        }
    }
}
