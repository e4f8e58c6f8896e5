//! Benchmark sweeps and the CSV run record.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use pgbfs_core::domains::{DomainKind, DomainSpec};
use pgbfs_core::engine::{ConstraintChoice, EngineConfig, Outcome, Scheduler, SearchResult};

use crate::io::load_domain;
use crate::runtime::solve;

/// One benchmark run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub domain: String,
    pub kind: String,
    pub seed: u64,
    pub engine: String,
    pub constraint: String,
    pub sge: bool,
    pub k: usize,
    pub scheduler: String,
    pub sched_seed: u64,
    pub solved: bool,
    /// Empty when solved; otherwise `time`, `memory`, `unsolvable` or `error`.
    pub fail_cause: String,
    pub expansions: u64,
    pub evaluations: u64,
    pub wasted_evals: u64,
    pub wall_s: f64,
    pub eval_rate: f64,
    pub peak_open: u64,
}

pub const CSV_COLUMNS: [&str; 17] = [
    "domain", "kind", "seed", "engine", "constraint", "sge", "k", "scheduler", "sched_seed", "solved",
    "fail_cause", "expansions", "evaluations", "wasted_evals", "wall_s", "eval_rate", "peak_open",
];

pub fn eval_rate(evaluations: u64, wall_s: f64) -> f64 {
    if wall_s > 0.0 {
        evaluations as f64 / wall_s
    } else {
        0.0
    }
}

impl RunRecord {
    fn skeleton(spec: &DomainSpec, config: &EngineConfig) -> Self {
        let (scheduler, sched_seed) = match config.scheduler {
            Scheduler::Real => ("real", 0),
            Scheduler::Deterministic { seed } => ("deterministic", seed),
        };
        RunRecord {
            domain: spec.label(),
            kind: spec.kind_name().to_string(),
            seed: spec.seed,
            engine: config.algorithm.name().to_string(),
            constraint: config.constraint_name().to_string(),
            sge: config.sge,
            k: config.workers,
            scheduler: scheduler.to_string(),
            sched_seed,
            solved: false,
            fail_cause: "error".to_string(),
            expansions: 0,
            evaluations: 0,
            wasted_evals: 0,
            wall_s: 0.0,
            eval_rate: 0.0,
            peak_open: 0,
        }
    }

    pub fn from_result(spec: &DomainSpec, config: &EngineConfig, result: &SearchResult) -> Self {
        let s = &result.stats;
        let wall_s = s.elapsed_ns as f64 * 1e-9;
        let fail_cause = match &result.outcome {
            Outcome::Solved(_) => "",
            Outcome::Unsolvable => "unsolvable",
            Outcome::LimitExceeded(c) => c.name(),
        };
        RunRecord {
            solved: result.outcome.is_solved(),
            fail_cause: fail_cause.to_string(),
            expansions: s.expansions,
            evaluations: s.evaluations,
            wasted_evals: s.wasted_evaluations,
            wall_s,
            eval_rate: eval_rate(s.evaluations, wall_s),
            peak_open: s.peak_open as u64,
            ..Self::skeleton(spec, config)
        }
    }

    /// Instance identity used to line runs up across configurations.
    pub fn instance(&self) -> (String, u64) {
        (self.domain.clone(), self.seed)
    }

    /// Configuration label, e.g. `cpgbfs(inflight-minh)+sge/k8`.
    pub fn config_label(&self) -> String {
        let mut l = self.variant_label();
        l.push_str(&format!("/k{}", self.k));
        if self.scheduler == "real" {
            l.push_str("@real");
        } else if self.sched_seed != 0 {
            l.push_str(&format!("#{}", self.sched_seed));
        }
        l
    }

    /// Label without the worker count: the row of a per-k table.
    pub fn variant_label(&self) -> String {
        let mut l = self.engine.clone();
        if self.engine == "cpgbfs" {
            l.push_str(&format!("({})", self.constraint));
        }
        if self.sge {
            l.push_str("+sge");
        }
        l
    }
}

/// Sweep-wide limits applied on top of each configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Limits {
    pub time_limit_s: Option<f64>,
    pub mem_limit_mb: Option<u64>,
}

impl Limits {
    pub fn apply(&self, config: &EngineConfig) -> EngineConfig {
        let mut c = config.clone();
        if let Some(t) = self.time_limit_s {
            c.time_limit_ns = Some((t * 1e9) as u64);
        }
        if let Some(m) = self.mem_limit_mb {
            c.memory_limit_bytes = Some(m * 1024 * 1024);
        }
        c
    }
}

/// Runs every (instance, config) pair. Each run builds its domain and engine
/// state from scratch. When `sink` is given, each record is written and
/// flushed as soon as it exists. Per-run failures become `error` records.
pub fn run_benchmark<W: Write>(
    suite: &[DomainSpec],
    configs: &[EngineConfig],
    limits: &Limits,
    mut sink: Option<&mut csv::Writer<W>>,
) -> Result<Vec<RunRecord>> {
    if suite.is_empty() || configs.is_empty() {
        bail!("benchmark needs at least one instance and one configuration");
    }
    let mut records = Vec::with_capacity(suite.len() * configs.len());
    for spec in suite {
        for config in configs {
            let config = limits.apply(config);
            let record = match load_domain(spec) {
                Ok(domain) => match solve(&domain, &config) {
                    Ok(result) => RunRecord::from_result(spec, &config, &result),
                    Err(_) => RunRecord::skeleton(spec, &config),
                },
                Err(_) => RunRecord::skeleton(spec, &config),
            };
            if let Some(w) = sink.as_deref_mut() {
                w.serialize(&record)?;
                w.flush()?;
            }
            records.push(record);
        }
    }
    Ok(records)
}

pub fn write_records<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: std::io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        bail!("unexpected CSV header {header:?}");
    }
    r.deserialize().map(|row| row.context("malformed CSV row")).collect()
}

pub fn read_records_file(path: &Path) -> Result<Vec<RunRecord>> {
    let f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_records(f)
}

/// `<engine>[+sge][:k]`, e.g. `gbfs`, `kpgbfs:8`, `cpgbfs+sge:4`. Cpgbfs uses
/// `constraint`.
pub fn parse_config(text: &str, constraint: &ConstraintChoice) -> Result<EngineConfig> {
    let (head, k) = match text.split_once(':') {
        Some((h, k)) => (h, usize::from_str(k).with_context(|| format!("bad worker count in `{text}`"))?),
        None => (text, 1),
    };
    let (engine, sge) = match head.strip_suffix("+sge") {
        Some(e) => (e, true),
        None => (head, false),
    };
    let config = match engine {
        "gbfs" => EngineConfig { workers: k, ..EngineConfig::gbfs() },
        "kpgbfs" => EngineConfig::kpgbfs(k),
        "cpgbfs" => EngineConfig::cpgbfs(k, constraint.clone()),
        other => bail!("unknown engine `{other}`"),
    }
    .with_sge(sge);
    config.validate()?;
    Ok(config)
}

/// Long plateau chains with deep decoy branches. Parallel workers pile onto
/// the siblings here, which is where separate evaluation pays off.
pub fn plateau_heavy_suite(n: usize) -> Vec<DomainSpec> {
    (0..n)
        .map(|i| {
            let kind = DomainKind::PlateauSynthetic {
                depth: 20 + (i as u32 * 7) % 21,
                width: 2 + (i as u32 * 3) % 5,
                decoy_depth: 3 + i as u32 % 2,
            };
            DomainSpec::new(kind, i as u64)
        })
        .collect()
}

/// A small mixed suite: plateaus, grids, tiles and random graphs.
pub fn desk_suite(per_kind: usize) -> Vec<DomainSpec> {
    let mut suite = plateau_heavy_suite(per_kind);
    for i in 0..per_kind as u64 {
        suite.push(DomainSpec::new(
            DomainKind::GridNav { width: 24 + 4 * i as u32, height: 24, obstacle_density: 0.25 },
            i,
        ));
        suite.push(DomainSpec::new(
            DomainKind::SlidingTile { rows: 3, cols: 3, tiles: None, scramble: 30 + 10 * i as u32 },
            i,
        ));
        suite.push(DomainSpec::new(
            DomainKind::RandomGraph { num_states: 300, edge_density: 0.02, h_max: 12, goal_count: 3 },
            i,
        ));
    }
    suite
}

pub fn named_suite(name: &str, n: usize) -> Result<Vec<DomainSpec>> {
    match name {
        "plateau-heavy" => Ok(plateau_heavy_suite(n)),
        "desk" => Ok(desk_suite(n)),
        other => bail!("unknown suite `{other}` (expected plateau-heavy or desk)"),
    }
}

/// KPGBFS, the inflight-minh constrained engine, each with and without SGE.
pub fn sge_comparison_configs(k: usize, delay_ns: u64, seed: u64) -> Vec<EngineConfig> {
    let mut out = vec![EngineConfig::gbfs().with_delay_ns(delay_ns).with_seed(seed)];
    for sge in [false, true] {
        out.push(EngineConfig::kpgbfs(k).with_sge(sge).with_delay_ns(delay_ns).with_seed(seed));
        out.push(
            EngineConfig::cpgbfs(k, ConstraintChoice::InflightMinH)
                .with_sge(sge)
                .with_delay_ns(delay_ns)
                .with_seed(seed),
        );
    }
    out
}
