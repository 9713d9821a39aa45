use super::*;
use crate::benders::{Cut, CutKind, CutOrigin, FilterContext};
use proptest::prelude::*;

fn cut(id: u64, kind: CutKind, coeffs: Vec<f64>, rhs: f64) -> Cut {
    Cut {
        id,
        origin: CutOrigin::Scenario(id as usize),
        kind,
        coeffs,
        rhs,
        iteration_created: 0,
    }
}

/// 1-d cut whose violation at x = [0] is exactly `v`.
fn cut_with_violation(id: u64, kind: CutKind, v: f64) -> Cut {
    cut(id, kind, vec![1.0], -v)
}

fn ctx(x: Vec<f64>, n_scenarios: usize) -> FilterContext {
    FilterContext { x, z_ub: f64::INFINITY, z_mp: 0.0, iteration: 0, n_scenarios }
}

#[test]
fn violation_examples() {
    let x = vec![2.0, 1.0];
    assert_eq!(violation(&cut(0, CutKind::Optimality, vec![2.0, 0.0], 3.0), &x).unwrap(), 1.0);
    assert_eq!(violation(&cut(1, CutKind::Optimality, vec![1.0, 0.0], 5.0), &x).unwrap(), 0.0);
    // scaling the cut doubles the absolute violation
    assert_eq!(violation(&cut(2, CutKind::Optimality, vec![4.0, 0.0], 6.0), &x).unwrap(), 2.0);
}

#[test]
fn violation_dimension_mismatch() {
    let c = cut(0, CutKind::Optimality, vec![1.0, 2.0], 0.0);
    assert!(matches!(
        violation(&c, &[1.0]),
        Err(FilterError::DimensionMismatch { expected: 2, got: 1 })
    ));
}

#[test]
fn feasibility_priority_outranks_every_optimality_cut() {
    let pool = vec![
        cut_with_violation(0, CutKind::Optimality, 5.0),
        cut_with_violation(1, CutKind::Optimality, 2.0),
        cut_with_violation(2, CutKind::Feasibility, 0.1),
    ];
    let scored = priority_scores(&pool, &[0.0]).unwrap();
    assert_eq!(scored[0].priority, 5.0);
    assert_eq!(scored[1].priority, 2.0);
    assert!((scored[2].priority - 6.1).abs() < 1e-12);
    let top = scored.iter().max_by(|a, b| a.priority.total_cmp(&b.priority)).unwrap();
    assert_eq!(top.cut_id, 2, "the feasibility cut ranks first");
}

#[test]
fn priorities_equal_violations_without_feasibility_cuts() {
    let pool = vec![
        cut_with_violation(0, CutKind::Optimality, 3.0),
        cut_with_violation(1, CutKind::Optimality, 1.0),
    ];
    for s in priority_scores(&pool, &[0.0]).unwrap() {
        assert_eq!(s.priority, s.violation);
    }
}

#[test]
fn feasibility_cuts_keep_their_relative_order() {
    let pool = vec![
        cut_with_violation(0, CutKind::Feasibility, 1.0),
        cut_with_violation(1, CutKind::Feasibility, 2.0),
    ];
    let scored = priority_scores(&pool, &[0.0]).unwrap();
    assert_eq!(scored[0].priority, 2.0);
    assert_eq!(scored[1].priority, 3.0);
    assert!(scored[1].priority > scored[0].priority);
}

#[test]
fn select_violation_fixed_takes_top_k() {
    let pool = vec![
        cut_with_violation(0, CutKind::Optimality, 5.0),
        cut_with_violation(1, CutKind::Optimality, 3.0),
        cut_with_violation(2, CutKind::Optimality, 2.0),
    ];
    let scored = priority_scores(&pool, &[0.0]).unwrap();
    let sel = select_violation(&scored, &CountPolicy::Fixed(2), &ctx(vec![0.0], 3));
    assert_eq!(sel, vec![0, 1]);
}

#[test]
fn select_violation_adaptive_stops_past_threshold() {
    let pool = vec![
        cut_with_violation(0, CutKind::Optimality, 5.0),
        cut_with_violation(1, CutKind::Optimality, 3.0),
        cut_with_violation(2, CutKind::Optimality, 2.0),
    ];
    let scored = priority_scores(&pool, &[0.0]).unwrap();
    let mut c = ctx(vec![0.0], 3);
    c.z_ub = 6.0;
    c.z_mp = 0.0;
    // rho = 1: cumulative 5 then 8 > 6, so exactly the 5- and 3-cuts
    let sel = select_violation(&scored, &CountPolicy::AdaptiveThreshold(1.0), &c);
    assert_eq!(sel, vec![0, 1]);
}

#[test]
fn select_violation_subproblem_fraction_of_forty() {
    let pool: Vec<Cut> = (0..10)
        .map(|i| cut_with_violation(i, CutKind::Optimality, 1.0 + i as f64))
        .collect();
    let scored = priority_scores(&pool, &[0.0]).unwrap();
    let sel = select_violation(&scored, &CountPolicy::SubproblemFraction(0.05), &ctx(vec![0.0], 40));
    assert_eq!(sel.len(), 2, "ceil(0.05 * 40) = 2");
    // the two most violated
    assert_eq!(sel, vec![9, 8]);
}

#[test]
fn select_diversity_keeps_antiparallel_singletons() {
    let a = cut(0, CutKind::Optimality, vec![1.0, 0.0], -1.0);
    let b = cut(1, CutKind::Optimality, vec![-1.0, 0.0], -1.0);
    let refs = vec![&a, &b];
    let sel = select_diversity(&refs, 2, 0).unwrap();
    assert_eq!(sel, vec![0, 1]);
}

#[test]
fn select_diversity_centroid_tie_takes_lower_id() {
    // cluster {(1,0), (3,0)}: centroid (2,0), both members at distance 1
    let a = cut(4, CutKind::Optimality, vec![1.0, 0.0], -1.0);
    let b = cut(9, CutKind::Optimality, vec![3.0, 0.0], -1.0);
    let refs = vec![&a, &b];
    let sel = select_diversity(&refs, 1, 0).unwrap();
    assert_eq!(sel.len(), 1);
    assert_eq!(refs[sel[0]].id, 4);
}

#[test]
fn select_diversity_saturates_to_identity() {
    let cuts: Vec<Cut> = (0..4)
        .map(|i| {
            let ang = i as f64;
            cut(i as u64, CutKind::Optimality, vec![ang.cos(), ang.sin()], -1.0)
        })
        .collect();
    let refs: Vec<&Cut> = cuts.iter().collect();
    let sel = select_diversity(&refs, 4, 0).unwrap();
    assert_eq!(sel, vec![0, 1, 2, 3]);
}

#[test]
fn select_hybrid_takes_per_cluster_max_violation() {
    // one cluster (k = 1), violations {1, 9, 4}
    let x = vec![0.0, 0.0];
    let cuts = vec![
        cut(0, CutKind::Optimality, vec![1.0, 0.001], -1.0),
        cut(1, CutKind::Optimality, vec![1.0, 0.002], -9.0),
        cut(2, CutKind::Optimality, vec![1.0, 0.003], -4.0),
    ];
    let refs: Vec<&Cut> = cuts.iter().collect();
    let sel = select_hybrid(&refs, 1, &x, 0).unwrap();
    assert_eq!(sel.len(), 1);
    assert_eq!(refs[sel[0]].id, 1);
}

#[test]
fn select_hybrid_identical_coeffs_pick_global_max() {
    let x = vec![0.0];
    let cuts = vec![
        cut(0, CutKind::Optimality, vec![2.0], -1.0),
        cut(1, CutKind::Optimality, vec![2.0], -7.0),
        cut(2, CutKind::Optimality, vec![2.0], -3.0),
    ];
    let refs: Vec<&Cut> = cuts.iter().collect();
    let sel = select_hybrid(&refs, 1, &x, 0).unwrap();
    assert_eq!(refs[sel[0]].id, 1);
}

#[test]
fn select_hybrid_two_separated_clusters() {
    let x = vec![0.0, 0.0];
    // cluster A along e1 with violations 2 and 6; cluster B along e2 with 5 and 1
    let cuts = vec![
        cut(0, CutKind::Optimality, vec![1.0, 0.00], -2.0),
        cut(1, CutKind::Optimality, vec![1.0, 0.01], -6.0),
        cut(2, CutKind::Optimality, vec![0.00, 1.0], -5.0),
        cut(3, CutKind::Optimality, vec![0.01, 1.0], -1.0),
    ];
    let refs: Vec<&Cut> = cuts.iter().collect();
    let sel = select_hybrid(&refs, 2, &x, 0).unwrap();
    let ids: Vec<u64> = sel.iter().map(|&i| refs[i].id).collect();
    assert_eq!(ids, vec![1, 2]);
}

#[test]
fn diversity_and_hybrid_share_the_partition() {
    let x = vec![0.0, 0.0];
    let cuts = vec![
        cut(0, CutKind::Optimality, vec![1.0, 0.00], -2.0),
        cut(1, CutKind::Optimality, vec![1.0, 0.05], -6.0),
        cut(2, CutKind::Optimality, vec![0.00, 1.0], -5.0),
        cut(3, CutKind::Optimality, vec![0.05, 1.0], -1.0),
        cut(4, CutKind::Optimality, vec![-1.0, 0.02], -3.0),
    ];
    let refs: Vec<&Cut> = cuts.iter().collect();
    let items: Vec<Vec<f64>> = cuts.iter().map(|c| c.coeffs.clone()).collect();
    let clustering = k_medoids(&items, 3, 7).unwrap();
    let div = select_diversity(&refs, 3, 7).unwrap();
    let hyb = select_hybrid(&refs, 3, &x, 7).unwrap();
    // one representative from every cluster under both rules
    for c in 0..clustering.k() {
        let members = clustering.members(c);
        assert_eq!(div.iter().filter(|i| members.contains(i)).count(), 1);
        assert_eq!(hyb.iter().filter(|i| members.contains(i)).count(), 1);
    }
}

#[test]
fn select_random_is_seed_deterministic() {
    let a = select_random(10, 3, 99);
    let b = select_random(10, 3, 99);
    assert_eq!(a, b);
    assert_eq!(a.len(), 3);
}

#[test]
fn select_random_saturates() {
    assert_eq!(select_random(4, 9, 1), vec![0, 1, 2, 3]);
}

#[test]
fn select_random_is_uniform() {
    let mut counts = [0usize; 5];
    for seed in 0..10_000u64 {
        let sel = select_random(5, 1, seed);
        counts[sel[0]] += 1;
    }
    for (i, &c) in counts.iter().enumerate() {
        let freq = c as f64 / 10_000.0;
        assert!(
            (freq - 0.2).abs() <= 0.02,
            "cut {i} selected with frequency {freq}, expected 0.2 +- 0.02"
        );
    }
}

#[test]
fn aggregate_weights_are_violation_normalized() {
    let x = vec![0.0, 0.0];
    let pool = vec![
        cut(0, CutKind::Optimality, vec![1.0, 0.0], -1.0), // violation 1
        cut(1, CutKind::Optimality, vec![0.0, 1.0], -3.0), // violation 3
    ];
    let agg = aggregate_discarded(&pool, &[], &x, 77, 4).unwrap().unwrap();
    assert_eq!(agg.id, 77);
    assert_eq!(agg.iteration_created, 4);
    assert_eq!(agg.origin, CutOrigin::Aggregate);
    assert!((agg.coeffs[0] - 0.25).abs() < 1e-12);
    assert!((agg.coeffs[1] - 0.75).abs() < 1e-12);
    assert!((agg.rhs - (0.25 * -1.0 + 0.75 * -3.0)).abs() < 1e-12);
    // aggregate violation is the convex combination of the violations
    assert!((violation(&agg, &x).unwrap() - 2.5).abs() < 1e-12);
}

#[test]
fn aggregate_empty_rest_returns_none() {
    let x = vec![0.0];
    let pool = vec![cut_with_violation(0, CutKind::Optimality, 2.0)];
    assert!(aggregate_discarded(&pool, &[0], &x, 1, 0).unwrap().is_none());
    // satisfied cuts are not aggregated either
    let pool = vec![cut(0, CutKind::Optimality, vec![1.0], 5.0)];
    assert!(aggregate_discarded(&pool, &[], &x, 1, 0).unwrap().is_none());
    // nor are discarded feasibility cuts
    let pool = vec![cut_with_violation(0, CutKind::Feasibility, 2.0)];
    assert!(aggregate_discarded(&pool, &[], &x, 1, 0).unwrap().is_none());
}

#[test]
fn filter_feasibility_overflow_appends_one_optimality_cut() {
    // 1 violated feasibility + 5 violated optimality cuts, budget 1
    let mut pool = vec![cut_with_violation(0, CutKind::Feasibility, 1.0)];
    for i in 1..=5 {
        pool.push(cut_with_violation(i, CutKind::Optimality, i as f64));
    }
    let config = StrategyConfig {
        kind: StrategyKind::Violation,
        aggregate: false,
        count_policy: CountPolicy::Fixed(1),
        seed: 0,
    };
    let sel = filter(&pool, &ctx(vec![0.0], 6), &config, 100).unwrap();
    assert_eq!(sel.cuts.len(), 2);
    assert_eq!(sel.n_feasibility, 1);
    assert_eq!(sel.cuts[0].id, 0, "feasibility cut first");
    assert_eq!(sel.cuts[1].id, 5, "then the most-violated optimality cut");
}

#[test]
fn filter_nofilter_passes_all_violated_only() {
    let pool = vec![
        cut_with_violation(0, CutKind::Optimality, 2.0),
        cut(1, CutKind::Optimality, vec![1.0], 5.0), // satisfied
        cut_with_violation(2, CutKind::Feasibility, 1.0),
    ];
    let config = StrategyConfig::default();
    let sel = filter(&pool, &ctx(vec![0.0], 3), &config, 100).unwrap();
    let ids: Vec<u64> = sel.cuts.iter().map(|c| c.id).collect();
    assert_eq!(ids, vec![0, 2]);
}

#[test]
fn filter_hybrid_plus_respects_counting_bound() {
    let pool: Vec<Cut> = (0..8)
        .map(|i| {
            let ang = i as f64 * 0.7;
            cut(i, CutKind::Optimality, vec![ang.cos(), ang.sin()], -(1.0 + i as f64))
        })
        .collect();
    let config = StrategyConfig {
        kind: StrategyKind::Hybrid,
        aggregate: true,
        count_policy: CountPolicy::Fixed(3),
        seed: 0,
    };
    let sel = filter(&pool, &ctx(vec![0.0, 0.0], 8), &config, 100).unwrap();
    assert!(sel.cuts.len() <= 3 + 1, "k representatives plus the aggregate");
    assert!(sel.aggregate_added);
    assert_eq!(sel.cuts.last().unwrap().origin, CutOrigin::Aggregate);
}

#[test]
fn filter_rejects_fully_satisfied_pool() {
    let pool = vec![cut(0, CutKind::Optimality, vec![1.0], 5.0)];
    let config = StrategyConfig::default();
    assert!(matches!(
        filter(&pool, &ctx(vec![0.0], 1), &config, 1),
        Err(FilterError::EmptyViolatedPool)
    ));
}

#[test]
fn strategy_spec_grammar_round_trips() {
    let cases = [
        ("none", StrategyKind::NoFilter, false),
        ("default", StrategyKind::NoFilter, false),
        ("random", StrategyKind::Random, false),
        ("violation", StrategyKind::Violation, false),
        ("diversity+", StrategyKind::Diversity, true),
        ("hybrid+", StrategyKind::Hybrid, true),
    ];
    for (spec, kind, aggregate) in cases {
        let c = StrategyConfig::parse(spec).unwrap();
        assert_eq!(c.kind, kind, "{spec}");
        assert_eq!(c.aggregate, aggregate, "{spec}");
        assert_eq!(c.count_policy, CountPolicy::SubproblemFraction(0.05), "{spec}");
    }
    let c = StrategyConfig::parse("violation@adaptive:2.5").unwrap();
    assert_eq!(c.count_policy, CountPolicy::AdaptiveThreshold(2.5));
    let c = StrategyConfig::parse("hybrid+@fixed:7").unwrap();
    assert_eq!(c.count_policy, CountPolicy::Fixed(7));
    assert!(c.aggregate);
    let c = StrategyConfig::parse("random@vfrac:0.25").unwrap();
    assert_eq!(c.count_policy, CountPolicy::ViolatedFraction(0.25));

    assert!(StrategyConfig::parse("hybrid@adaptive:2").is_err(), "adaptive is violation-only");
    assert!(StrategyConfig::parse("bogus").is_err());
    assert!(StrategyConfig::parse("violation@fixed:0").is_err());
    assert!(StrategyConfig::parse("violation@frac:1.5").is_err());
}

// ---------------------------------------------------------------------------
// property tests
// ---------------------------------------------------------------------------

fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, dim).prop_filter("norm must be positive", |v| {
        v.iter().map(|x| x * x).sum::<f64>().sqrt() > 0.05
    })
}

proptest! {
    #[test]
    fn cosine_symmetric_bounded_scale_invariant(
        a in nonzero_vec(4),
        b in nonzero_vec(4),
        sa in 1e-3f64..1e3,
        sb in 1e-3f64..1e3,
    ) {
        let d = cosine_distance(&a, &b).unwrap();
        let d_rev = cosine_distance(&b, &a).unwrap();
        prop_assert!((0.0..=2.0).contains(&d));
        prop_assert!((d - d_rev).abs() < 1e-12);
        let a_s: Vec<f64> = a.iter().map(|x| x * sa).collect();
        let b_s: Vec<f64> = b.iter().map(|x| x * sb).collect();
        prop_assert!((cosine_distance(&a_s, &b_s).unwrap() - d).abs() < 1e-9);
        prop_assert!(cosine_distance(&a, &a_s).unwrap() < 1e-9);
    }

    #[test]
    fn kmedoids_exact_matches_brute_force(
        polar in prop::collection::vec((0.1f64..3.0, 0.0f64..std::f64::consts::TAU), 2..=10),
        k_raw in 1usize..=4,
    ) {
        let items: Vec<Vec<f64>> =
            polar.iter().map(|&(r, t)| vec![r * t.cos(), r * t.sin()]).collect();
        let k = k_raw.min(items.len());
        let got = k_medoids(&items, k, 0).unwrap();

        // independent recursive enumeration with the same tie rule
        let n = items.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i * n + j] = cosine_distance(&items[i], &items[j]).unwrap();
                }
            }
        }
        fn assess(dist: &[f64], n: usize, set: &[usize]) -> f64 {
            (0..n)
                .map(|i| set.iter().map(|&m| dist[i * n + m]).fold(f64::INFINITY, f64::min))
                .sum()
        }
        fn rec(
            dist: &[f64],
            n: usize,
            k: usize,
            start: usize,
            cur: &mut Vec<usize>,
            best: &mut Option<(f64, Vec<usize>)>,
        ) {
            if cur.len() == k {
                let obj = assess(dist, n, cur);
                if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                    *best = Some((obj, cur.clone()));
                }
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(dist, n, k, i + 1, cur, best);
                cur.pop();
            }
        }
        let mut best = None;
        rec(&dist, n, k, 0, &mut Vec::new(), &mut best);
        let (oracle_obj, oracle_set) = best.unwrap();
        prop_assert_eq!(got.medoids, oracle_set);
        prop_assert_eq!(got.objective.to_bits(), oracle_obj.to_bits());
    }

    #[test]
    fn filter_is_deterministic_and_bounded(
        violations in prop::collection::vec(0.0f64..10.0, 2..=12),
        feas_mask in prop::collection::vec(any::<bool>(), 2..=12),
        kind_pick in 0usize..4,
        budget in 1usize..=4,
        aggregate in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let n = violations.len().min(feas_mask.len());
        let pool: Vec<Cut> = (0..n)
            .map(|i| {
                let kind = if feas_mask[i] { CutKind::Feasibility } else { CutKind::Optimality };
                // angles spread the coefficient directions for clustering
                let ang = 0.5 * i as f64;
                cut(i as u64, kind, vec![ang.cos() + 1.5, ang.sin()], {
                    let lhs = (ang.cos() + 1.5) * 0.0 + ang.sin() * 0.0;
                    lhs - violations[i]
                })
            })
            .collect();
        let x = vec![0.0, 0.0];
        let kind = [
            StrategyKind::Random,
            StrategyKind::Violation,
            StrategyKind::Diversity,
            StrategyKind::Hybrid,
        ][kind_pick];
        let config = StrategyConfig {
            kind,
            aggregate,
            count_policy: CountPolicy::Fixed(budget),
            seed,
        };
        let c = ctx(x.clone(), n);
        let any_violated = pool.iter().any(|cu| violation(cu, &x).unwrap() > EPS_CUT);
        let result = filter(&pool, &c, &config, 1000);
        if !any_violated {
            prop_assert!(matches!(result, Err(FilterError::EmptyViolatedPool)));
            return Ok(());
        }
        let sel = result.unwrap();
        let again = filter(&pool, &c, &config, 1000).unwrap();
        let ids: Vec<u64> = sel.cuts.iter().map(|cu| cu.id).collect();
        let ids_again: Vec<u64> = again.cuts.iter().map(|cu| cu.id).collect();
        prop_assert_eq!(&ids, &ids_again, "identical inputs must select identically");

        // every selected cut is violated
        for cu in &sel.cuts {
            prop_assert!(violation(cu, &x).unwrap() > EPS_CUT * 0.999);
        }
        // size bound: max(budget, feasibility overflow + rule-4) + aggregate
        let cap = budget.max(sel.n_feasibility + 1) + usize::from(sel.aggregate_added);
        prop_assert!(sel.cuts.len() <= cap);
        // at least one optimality cut whenever one is violated
        let opt_violated = pool.iter().any(|cu| {
            cu.kind == CutKind::Optimality && violation(cu, &x).unwrap() > EPS_CUT
        });
        if opt_violated {
            let opt_selected = sel
                .cuts
                .iter()
                .filter(|cu| cu.kind == CutKind::Optimality)
                .count();
            prop_assert!(opt_selected >= 1);
        }
    }
}
