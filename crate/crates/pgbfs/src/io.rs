//! Topology files, domain loading and result/trace serialization.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use pgbfs_core::domains::{make_domain, Domain, DomainKind, DomainSpec};
use pgbfs_core::engine::{Outcome, SearchResult, SearchTrace};
use pgbfs_core::format::{load_topology, save_topology};
use pgbfs_core::oracle::HWM_STATE_CAP;
use pgbfs_core::topology::materialize;
use pgbfs_core::ExplicitTopology;

pub fn read_topology(path: &Path) -> Result<ExplicitTopology> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_topology(&text).with_context(|| format!("loading {}", path.display()))
}

pub fn write_topology(path: &Path, topo: &ExplicitTopology) -> Result<()> {
    fs::write(path, save_topology(topo)).with_context(|| format!("writing {}", path.display()))
}

/// Like `make_domain`, but also reads `explicit-file` specs from disk.
pub fn load_domain(spec: &DomainSpec) -> Result<Domain> {
    match &spec.kind {
        DomainKind::ExplicitFile { path } => Ok(Domain::Explicit(read_topology(Path::new(path))?)),
        _ => Ok(make_domain(spec)?),
    }
}

/// The domain as an explicit table, materializing implicit ones up to the
/// oracle size cap.
pub fn explicit_domain(spec: &DomainSpec) -> Result<ExplicitTopology> {
    match load_domain(spec)? {
        Domain::Explicit(t) => Ok(t),
        other => Ok(materialize(&other, HWM_STATE_CAP)?),
    }
}

pub fn read_suite(path: &Path) -> Result<Vec<DomainSpec>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing suite {}", path.display()))
}

/// What `solve` prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub solved: bool,
    pub outcome: String,
    pub path: Option<Vec<u32>>,
    pub expansions: u64,
    pub evaluations: u64,
    pub wasted_evaluations: u64,
    pub wall_seconds: f64,
    pub peak_open: usize,
    pub idle_seconds: Vec<f64>,
}

impl SolveReport {
    pub fn new(result: &SearchResult) -> Self {
        let outcome = match &result.outcome {
            Outcome::Solved(_) => "solved".to_string(),
            Outcome::Unsolvable => "unsolvable".to_string(),
            Outcome::LimitExceeded(c) => c.name().to_string(),
        };
        let s = &result.stats;
        SolveReport {
            solved: result.outcome.is_solved(),
            outcome,
            path: result.outcome.path().map(|p| p.states.iter().map(|s| s.0).collect()),
            expansions: s.expansions,
            evaluations: s.evaluations,
            wasted_evaluations: s.wasted_evaluations,
            wall_seconds: s.elapsed_ns as f64 * 1e-9,
            peak_open: s.peak_open,
            idle_seconds: s.idle_ns.iter().map(|&ns| ns as f64 * 1e-9).collect(),
        }
    }
}

/// One JSON object per event.
pub fn write_trace_jsonl<W: Write>(trace: &SearchTrace, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    for e in &trace.events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// SHA-256 of a trace's JSONL form. Stable across processes.
pub fn trace_digest(trace: &SearchTrace) -> String {
    let mut buf = Vec::new();
    write_trace_jsonl(trace, &mut buf).expect("writing to memory");
    Sha256::digest(&buf).iter().map(|b| format!("{b:02x}")).collect()
}
