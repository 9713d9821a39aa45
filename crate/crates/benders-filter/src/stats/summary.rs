//! Exclusion rules, per-configuration summaries, and CSV round-tripping.

use std::path::Path;

use super::{
    performance_profile, shifted_geomean, wilcoxon_signed_rank, ConfigRunTable, RunRow,
    StatsError,
};

#[derive(Debug, Clone, Copy)]
pub struct FilterRules {
    /// drop instances every configuration solved faster than this
    pub min_time_s: f64,
    /// keep only instances solved to optimality by every configuration
    pub solved_by_all: bool,
}

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules { min_time_s: 50.0, solved_by_all: true }
    }
}

/// Restrict the table to the instances aggregates may use. Per-configuration
/// solved counts are *not* computed here; they always come from the full
/// table.
pub fn filter_rows(table: &ConfigRunTable, rules: &FilterRules) -> ConfigRunTable {
    let configs = table.configs();
    let keep: Vec<String> = table
        .instances()
        .into_iter()
        .filter(|inst| {
            let rows: Vec<&RunRow> =
                configs.iter().filter_map(|c| table.get(inst, c)).collect();
            if rows.len() != configs.len() {
                return false; // not run everywhere
            }
            let all_fast = rows.iter().all(|r| r.time_s < rules.min_time_s);
            if all_fast {
                return false;
            }
            if rules.solved_by_all && !rows.iter().all(|r| r.solved()) {
                return false;
            }
            true
        })
        .collect();
    ConfigRunTable::new(
        table
            .rows
            .iter()
            .filter(|r| keep.contains(&r.instance))
            .cloned()
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub config: String,
    /// instances solved to optimality, over the full table
    pub solved: usize,
    pub time_sum: f64,
    pub time_mean: f64,
    pub time_geomean: f64,
    /// shifted geomean of iteration counts, relative to the baseline
    pub iter_ratio: f64,
    /// shifted geomean of cuts per iteration, relative to the baseline
    pub cuts_per_iter_ratio: f64,
    /// two-sided signed-rank p vs the baseline; `None` below the pair minimum
    pub wilcoxon_p: Option<f64>,
    pub stars: String,
}

fn stars_for(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Table-style summary: exclusion rules applied, aggregates per
/// configuration, ratios and significance against `baseline`.
pub fn summarize(
    table: &ConfigRunTable,
    baseline: &str,
    shift: f64,
    rules: &FilterRules,
) -> Result<Vec<SummaryRow>, StatsError> {
    let configs = table.configs();
    if !configs.iter().any(|c| c == baseline) {
        return Err(StatsError::UnknownBaseline(baseline.to_string()));
    }
    let subset = filter_rows(table, rules);
    let kept = subset.instances();

    let series = |config: &str| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut times = Vec::new();
        let mut iters = Vec::new();
        let mut cpi = Vec::new();
        for inst in &kept {
            let r = subset.get(inst, config).expect("subset is complete");
            times.push(r.time_s);
            iters.push(r.iterations as f64);
            cpi.push(r.total_cuts as f64 / (r.iterations.max(1)) as f64);
        }
        (times, iters, cpi)
    };
    let geo = |v: &[f64]| shifted_geomean(v, shift).unwrap_or(f64::NAN);

    let (base_times, base_iters, base_cpi) = series(baseline);
    let base_iter_geo = geo(&base_iters);
    let base_cpi_geo = geo(&base_cpi);

    let mut out = Vec::with_capacity(configs.len());
    for config in &configs {
        let (times, iters, cpi) = series(config);
        let solved = table
            .rows
            .iter()
            .filter(|r| &r.config == config && r.solved())
            .count();
        let wilcoxon_p = match wilcoxon_signed_rank(&times, &base_times) {
            Ok(p) => Some(p),
            Err(StatsError::InsufficientPairs { .. }) | Err(StatsError::EmptyInput) => None,
            Err(e) => return Err(e),
        };
        out.push(SummaryRow {
            config: config.clone(),
            solved,
            time_sum: times.iter().sum(),
            time_mean: if times.is_empty() {
                f64::NAN
            } else {
                times.iter().sum::<f64>() / times.len() as f64
            },
            time_geomean: geo(&times),
            iter_ratio: geo(&iters) / base_iter_geo,
            cuts_per_iter_ratio: geo(&cpi) / base_cpi_geo,
            wilcoxon_p,
            stars: wilcoxon_p.map_or(String::new(), |p| stars_for(p).to_string()),
        });
    }
    Ok(out)
}

// --- CSV formats -----------------------------------------------------------
// results: instance,config,status,time_s,iterations,total_cuts,objective,gap
// summary: config,solved,time_sum,time_mean,time_geomean,iter_ratio,
//          cuts_per_iter_ratio,wilcoxon_p,stars
// profile: config,tau,fraction
// Times use 2 decimals, p-values 4; objectives and gaps 6.

pub fn write_results_csv(table: &ConfigRunTable, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["instance", "config", "status", "time_s", "iterations", "total_cuts", "objective", "gap"])?;
    for r in &table.rows {
        w.write_record([
            r.instance.as_str(),
            r.config.as_str(),
            r.status.as_str(),
            &format!("{:.2}", r.time_s),
            &r.iterations.to_string(),
            &r.total_cuts.to_string(),
            &format!("{:.6}", r.objective),
            &format!("{:.6}", r.gap),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(path: impl AsRef<Path>) -> Result<ConfigRunTable, StatsError> {
    let mut reader = csv::Reader::from_path(&path)
        .map_err(|e| StatsError::MalformedRow(e.to_string()))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| StatsError::MalformedRow(e.to_string()))?;
        let field = |i: usize| -> Result<&str, StatsError> {
            record
                .get(i)
                .ok_or_else(|| StatsError::MalformedRow(format!("missing column {i}: {record:?}")))
        };
        let parse_f = |i: usize| -> Result<f64, StatsError> {
            field(i)?
                .parse()
                .map_err(|_| StatsError::MalformedRow(format!("bad number in column {i}: {record:?}")))
        };
        let parse_u = |i: usize| -> Result<u64, StatsError> {
            field(i)?
                .parse()
                .map_err(|_| StatsError::MalformedRow(format!("bad count in column {i}: {record:?}")))
        };
        rows.push(RunRow {
            instance: field(0)?.to_string(),
            config: field(1)?.to_string(),
            status: field(2)?.to_string(),
            time_s: parse_f(3)?,
            iterations: parse_u(4)?,
            total_cuts: parse_u(5)?,
            objective: parse_f(6)?,
            gap: parse_f(7)?,
        });
    }
    Ok(ConfigRunTable::new(rows))
}

pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "config", "solved", "time_sum", "time_mean", "time_geomean", "iter_ratio",
        "cuts_per_iter_ratio", "wilcoxon_p", "stars",
    ])?;
    for r in rows {
        w.write_record([
            r.config.as_str(),
            &r.solved.to_string(),
            &format!("{:.2}", r.time_sum),
            &format!("{:.2}", r.time_mean),
            &format!("{:.2}", r.time_geomean),
            &format!("{:.2}", r.iter_ratio),
            &format!("{:.2}", r.cuts_per_iter_ratio),
            &r.wilcoxon_p.map_or(String::new(), |p| format!("{p:.4}")),
            r.stars.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile_csv(table: &ConfigRunTable, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["config", "tau", "fraction"])?;
    for (config, curve) in performance_profile(table) {
        for (tau, fraction) in curve {
            w.write_record([config.as_str(), &format!("{tau:.6}"), &format!("{fraction:.6}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: &str, config: &str, status: &str, time_s: f64) -> RunRow {
        RunRow {
            instance: instance.into(),
            config: config.into(),
            status: status.into(),
            time_s,
            iterations: 100,
            total_cuts: 500,
            objective: 1.25,
            gap: 0.0,
        }
    }

    #[test]
    fn all_fast_instances_are_dropped() {
        let table = ConfigRunTable::new(vec![
            row("quick", "a", "Optimal", 10.0),
            row("quick", "b", "Optimal", 20.0),
            row("quick", "c", "Optimal", 30.0),
        ]);
        let kept = filter_rows(&table, &FilterRules::default());
        assert!(kept.rows.is_empty());
    }

    #[test]
    fn mixed_speed_instances_are_retained() {
        let table = ConfigRunTable::new(vec![
            row("mixed", "a", "Optimal", 10.0),
            row("mixed", "b", "Optimal", 60.0),
        ]);
        let kept = filter_rows(&table, &FilterRules::default());
        assert_eq!(kept.instances(), vec!["mixed".to_string()]);
    }

    #[test]
    fn timeouts_leave_aggregates_but_keep_solved_counts() {
        let table = ConfigRunTable::new(vec![
            row("i1", "a", "Optimal", 60.0),
            row("i1", "b", "TimeLimit", 600.0),
            row("i2", "a", "Optimal", 70.0),
            row("i2", "b", "Optimal", 80.0),
        ]);
        let kept = filter_rows(&table, &FilterRules::default());
        assert_eq!(kept.instances(), vec!["i2".to_string()]);
        let summary = summarize(&table, "a", 10.0, &FilterRules::default()).unwrap();
        assert_eq!(summary[0].solved, 2, "config a solved both");
        assert_eq!(summary[1].solved, 1, "config b still counts i2");
        assert!((summary[0].time_sum - 70.0).abs() < 1e-12);
    }

    #[test]
    fn baseline_only_table_self_ratios() {
        let table = ConfigRunTable::new(vec![
            row("i1", "default", "Optimal", 60.0),
            row("i2", "default", "Optimal", 90.0),
        ]);
        let summary = summarize(&table, "default", 10.0, &FilterRules::default()).unwrap();
        assert_eq!(summary.len(), 1);
        assert!((summary[0].iter_ratio - 1.0).abs() < 1e-12);
        assert!((summary[0].cuts_per_iter_ratio - 1.0).abs() < 1e-12);
        assert_eq!(summary[0].wilcoxon_p, Some(1.0));
        assert_eq!(summary[0].stars, "");
    }

    #[test]
    fn identical_configs_tie_at_p_one() {
        let mut rows = Vec::new();
        for i in 0..6 {
            let t = 55.0 + 3.0 * i as f64;
            rows.push(row(&format!("i{i}"), "default", "Optimal", t));
            rows.push(row(&format!("i{i}"), "copy", "Optimal", t));
        }
        let summary = summarize(&ConfigRunTable::new(rows), "default", 10.0, &FilterRules::default())
            .unwrap();
        let copy = summary.iter().find(|r| r.config == "copy").unwrap();
        assert!((copy.iter_ratio - 1.0).abs() < 1e-12);
        assert_eq!(copy.wilcoxon_p, Some(1.0));
    }

    #[test]
    fn hand_computed_geomeans_match() {
        // times 90 and 390 with shift 10: shifted geomean 190
        let table = ConfigRunTable::new(vec![
            row("i1", "a", "Optimal", 90.0),
            row("i2", "a", "Optimal", 390.0),
        ]);
        let summary = summarize(&table, "a", 10.0, &FilterRules::default()).unwrap();
        assert!((summary[0].time_geomean - 190.0).abs() < 1e-9);
        assert!((summary[0].time_mean - 240.0).abs() < 1e-12);
        assert!((summary[0].time_sum - 480.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_baseline_is_an_error() {
        let table = ConfigRunTable::new(vec![row("i", "a", "Optimal", 60.0)]);
        assert_eq!(
            summarize(&table, "nope", 10.0, &FilterRules::default()).unwrap_err(),
            StatsError::UnknownBaseline("nope".into())
        );
    }

    #[test]
    fn results_csv_round_trips() {
        let table = ConfigRunTable::new(vec![
            RunRow {
                instance: "i1".into(),
                config: "hybrid+".into(),
                status: "Optimal".into(),
                time_s: 12.25,
                iterations: 37,
                total_cuts: 120,
                objective: 45.5,
                gap: 0.0,
            },
            RunRow {
                instance: "i2".into(),
                config: "hybrid+".into(),
                status: "TimeLimit".into(),
                time_s: 600.0,
                iterations: 900,
                total_cuts: 2700,
                objective: 61.125,
                gap: 0.03125,
            },
        ]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_results_csv(&table, &path).unwrap();
        let back = read_results_csv(&path).unwrap();
        assert_eq!(back.rows, table.rows);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("instance,config,status,time_s,iterations,total_cuts,objective,gap"));
    }
}
