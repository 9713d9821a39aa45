//! Benchmark statistics: shifted geometric means, exclusion rules, Wilcoxon
//! signed-rank tests, performance profiles, and the CSV formats consumed by
//! downstream tooling.

mod geomean;
mod profile;
mod summary;
mod wilcoxon;

pub use geomean::shifted_geomean;
pub use profile::performance_profile;
pub use summary::{
    filter_rows, read_results_csv, summarize, write_profile_csv, write_results_csv,
    write_summary_csv, FilterRules, SummaryRow,
};
pub use wilcoxon::wilcoxon_signed_rank;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empty input")]
    EmptyInput,
    #[error("need at least {needed} non-tied pairs, have {got}")]
    InsufficientPairs { needed: usize, got: usize },
    #[error("paired samples differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("baseline configuration '{0}' not present in the table")]
    UnknownBaseline(String),
    #[error("malformed results row: {0}")]
    MalformedRow(String),
}

/// Outcome of one (instance, configuration) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub instance: String,
    pub config: String,
    pub status: String,
    pub time_s: f64,
    pub iterations: u64,
    pub total_cuts: u64,
    pub objective: f64,
    pub gap: f64,
}

impl RunRow {
    pub fn solved(&self) -> bool {
        self.status == "Optimal"
    }
}

/// Row-oriented results table over (instance, configuration) pairs.
#[derive(Debug, Clone, Default)]
pub struct ConfigRunTable {
    pub rows: Vec<RunRow>,
}

impl ConfigRunTable {
    pub fn new(rows: Vec<RunRow>) -> Self {
        ConfigRunTable { rows }
    }

    /// Configurations in first-appearance order.
    pub fn configs(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.config) {
                out.push(r.config.clone());
            }
        }
        out
    }

    /// Instances in first-appearance order.
    pub fn instances(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.instance) {
                out.push(r.instance.clone());
            }
        }
        out
    }

    pub fn get(&self, instance: &str, config: &str) -> Option<&RunRow> {
        self.rows
            .iter()
            .find(|r| r.instance == instance && r.config == config)
    }
}
