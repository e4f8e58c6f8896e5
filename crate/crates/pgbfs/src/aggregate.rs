//! Geometric means over commonly solved instances, coverage and the pairwise
//! solved-by matrix.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::bench::RunRecord;

/// Zero counts are raised to this before taking logs.
pub const COUNT_FLOOR: f64 = 1.0;
/// Zero times and rates are raised to this before taking logs.
pub const SECONDS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggregateError {
    #[error("geometric mean of an empty sequence")]
    Empty,
    #[error("geometric mean needs positive values, got {0}")]
    NonPositive(String),
    #[error("no records to aggregate")]
    NoRecords,
}

/// `exp(mean(ln v))`.
pub fn geometric_mean(values: &[f64]) -> Result<f64, AggregateError> {
    if values.is_empty() {
        return Err(AggregateError::Empty);
    }
    if let Some(v) = values.iter().find(|v| v.is_nan() || **v <= 0.0 || v.is_infinite()) {
        return Err(AggregateError::NonPositive(v.to_string()));
    }
    let mean_log = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    Ok(mean_log.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSummary {
    pub label: String,
    /// Engine, constraint and SGE without the worker count.
    pub variant: String,
    pub k: usize,
    pub runs: usize,
    pub coverage: usize,
    /// Means over the commonly solved instances; `None` when there are none.
    pub eval_rate: Option<f64>,
    pub expansions: Option<f64>,
    pub search_time_s: Option<f64>,
    /// Arithmetic mean of `wall(gbfs) / wall(run)`; needs a `gbfs` config.
    pub speedup: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub instances: usize,
    pub common_solved: usize,
    pub means_defined: bool,
    pub baseline: Option<String>,
    pub configs: Vec<ConfigSummary>,
    /// `pairwise[i][j]`: instances solved by config `i` but not by config `j`.
    pub pairwise: Vec<Vec<usize>>,
}

impl AggregateReport {
    pub fn config(&self, label: &str) -> Option<&ConfigSummary> {
        self.configs.iter().find(|c| c.label == label)
    }
}

/// Builds the report. Configurations keep first-appearance order; a repeated
/// (configuration, instance) pair keeps its first record.
pub fn aggregate(records: &[RunRecord]) -> Result<AggregateReport, AggregateError> {
    if records.is_empty() {
        return Err(AggregateError::NoRecords);
    }
    let mut labels: Vec<String> = Vec::new();
    let mut first: Vec<&RunRecord> = Vec::new();
    let mut runs: HashMap<String, BTreeMap<(String, u64), &RunRecord>> = HashMap::new();
    let mut instances: BTreeSet<(String, u64)> = BTreeSet::new();
    for r in records {
        let label = r.config_label();
        if !runs.contains_key(&label) {
            labels.push(label.clone());
            first.push(r);
        }
        instances.insert(r.instance());
        runs.entry(label).or_default().entry(r.instance()).or_insert(r);
    }

    let solved_by = |label: &str, inst: &(String, u64)| runs[label].get(inst).is_some_and(|r| r.solved);
    let common: Vec<&(String, u64)> = instances
        .iter()
        .filter(|inst| labels.iter().all(|l| solved_by(l, inst)))
        .collect();
    let baseline = labels.iter().zip(&first).find(|(_, r)| r.engine == "gbfs").map(|(l, _)| l.clone());

    let mut configs = Vec::with_capacity(labels.len());
    for (label, r0) in labels.iter().zip(&first) {
        let table = &runs[label];
        let on_common: Vec<&RunRecord> = common.iter().map(|inst| table[*inst]).collect();
        let gm = |f: &dyn Fn(&RunRecord) -> f64| -> Option<f64> {
            let v: Vec<f64> = on_common.iter().map(|r| f(r)).collect();
            geometric_mean(&v).ok()
        };
        let speedup = baseline.as_ref().filter(|_| !common.is_empty()).map(|b| {
            let base = &runs[b];
            let sum: f64 = common
                .iter()
                .map(|inst| {
                    base[*inst].wall_s.max(SECONDS_FLOOR) / table[*inst].wall_s.max(SECONDS_FLOOR)
                })
                .sum();
            sum / common.len() as f64
        });
        configs.push(ConfigSummary {
            label: label.clone(),
            variant: r0.variant_label(),
            k: r0.k,
            runs: table.len(),
            coverage: table.values().filter(|r| r.solved).count(),
            eval_rate: gm(&|r| r.eval_rate.max(SECONDS_FLOOR)),
            expansions: gm(&|r| (r.expansions as f64).max(COUNT_FLOOR)),
            search_time_s: gm(&|r| r.wall_s.max(SECONDS_FLOOR)),
            speedup,
        });
    }

    let pairwise = labels
        .iter()
        .map(|a| {
            labels
                .iter()
                .map(|b| instances.iter().filter(|i| solved_by(a, i) && !solved_by(b, i)).count())
                .collect()
        })
        .collect();

    Ok(AggregateReport {
        instances: instances.len(),
        common_solved: common.len(),
        means_defined: !common.is_empty(),
        baseline,
        configs,
        pairwise,
    })
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    match v {
        Some(x) => format!("{x:.digits$}"),
        None => "n/a".to_string(),
    }
}

/// Rows are engine variants, columns worker counts.
fn per_k_table(out: &mut String, title: &str, report: &AggregateReport, cell: impl Fn(&ConfigSummary) -> String) {
    let ks: BTreeSet<usize> = report.configs.iter().map(|c| c.k).collect();
    let mut variants: Vec<&str> = Vec::new();
    for c in &report.configs {
        if !variants.contains(&c.variant.as_str()) {
            variants.push(&c.variant);
        }
    }
    let _ = writeln!(out, "### {title}\n");
    let _ = write!(out, "| |");
    for k in &ks {
        let _ = write!(out, " k={k} |");
    }
    let _ = write!(out, "\n|---|");
    for _ in &ks {
        let _ = write!(out, "---:|");
    }
    out.push('\n');
    for v in variants {
        let _ = write!(out, "| {v} |");
        for k in &ks {
            let c = report.configs.iter().find(|c| c.variant == v && c.k == *k);
            let _ = write!(out, " {} |", c.map(&cell).unwrap_or_default());
        }
        out.push('\n');
    }
    out.push('\n');
}

pub fn to_markdown(report: &AggregateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Means over {} of {} instances solved by every configuration.\n",
        report.common_solved, report.instances
    );
    if !report.means_defined {
        out.push_str("No instance is solved by every configuration, so means are undefined.\n\n");
    }
    per_k_table(&mut out, "1a. Evaluation rate (evaluations/s, geometric mean)", report, |c| fmt_opt(c.eval_rate, 0));
    per_k_table(&mut out, "1b. Expansions (geometric mean)", report, |c| fmt_opt(c.expansions, 1));
    per_k_table(&mut out, "1c. Search time (s, geometric mean)", report, |c| fmt_opt(c.search_time_s, 6));
    let speed_title = match &report.baseline {
        Some(b) => format!("1d. Speedup over {b} (arithmetic mean)"),
        None => "1d. Speedup (no gbfs baseline in the data)".to_string(),
    };
    per_k_table(&mut out, &speed_title, report, |c| fmt_opt(c.speedup, 2));
    per_k_table(&mut out, "2a. Coverage", report, |c| format!("{}/{}", c.coverage, c.runs));

    let _ = writeln!(out, "### 2b. Solved by row, not by column\n");
    let _ = write!(out, "| |");
    for c in &report.configs {
        let _ = write!(out, " {} |", c.label);
    }
    let _ = write!(out, "\n|---|");
    for _ in &report.configs {
        out.push_str("---:|");
    }
    out.push('\n');
    for (c, row) in report.configs.iter().zip(&report.pairwise) {
        let _ = write!(out, "| {} |", c.label);
        for n in row {
            let _ = write!(out, " {n} |");
        }
        out.push('\n');
    }
    out
}
