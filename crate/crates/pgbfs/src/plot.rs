//! Per-instance scatter data comparing two configurations.

use std::collections::BTreeMap;
use std::io::Write;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use crate::bench::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    EvalRate,
    Expansions,
    WallS,
}

impl Metric {
    pub fn of(self, r: &RunRecord) -> f64 {
        match self {
            Metric::EvalRate => r.eval_rate,
            Metric::Expansions => r.expansions as f64,
            Metric::WallS => r.wall_s,
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        match s {
            "eval_rate" => Some(Metric::EvalRate),
            "expansions" => Some(Metric::Expansions),
            "wall_s" => Some(Metric::WallS),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub domain: String,
    pub seed: u64,
    /// Unsolved runs sit at `fail_value`.
    pub x: f64,
    pub y: f64,
    pub x_fail: bool,
    pub y_fail: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub x_config: String,
    pub y_config: String,
    pub metric: Metric,
    /// Coordinate of the "fail" band, above every solved value.
    pub fail_value: f64,
    /// Slopes of the reference lines `y = a x`.
    pub diagonals: Vec<f64>,
    pub points: Vec<PlotPoint>,
}

impl PlotData {
    /// Points strictly below `y = x`, both sides solved.
    pub fn below_diagonal(&self) -> usize {
        self.points.iter().filter(|p| !p.x_fail && !p.y_fail && p.y < p.x).count()
    }
}

/// Pairs the runs of configurations `x` and `y` (by label) on each instance
/// that both attempted.
pub fn emit_plot_data(records: &[RunRecord], x: &str, y: &str, metric: Metric) -> Result<PlotData> {
    let mut xs: BTreeMap<(String, u64), &RunRecord> = BTreeMap::new();
    let mut ys: BTreeMap<(String, u64), &RunRecord> = BTreeMap::new();
    for r in records {
        let label = r.config_label();
        if label == x {
            xs.entry(r.instance()).or_insert(r);
        }
        if label == y {
            ys.entry(r.instance()).or_insert(r);
        }
    }
    for (name, side) in [(x, &xs), (y, &ys)] {
        if side.is_empty() {
            bail!("configuration `{name}` not found");
        }
    }
    let max_solved = xs
        .values()
        .chain(ys.values())
        .filter(|r| r.solved)
        .map(|r| metric.of(r))
        .fold(0.0f64, f64::max);
    let fail_value = if max_solved > 0.0 { max_solved * 10.0 } else { 1.0 };
    let points = xs
        .iter()
        .filter_map(|(inst, rx)| ys.get(inst).map(|ry| (inst, rx, ry)))
        .map(|(inst, rx, ry)| PlotPoint {
            domain: inst.0.clone(),
            seed: inst.1,
            x: if rx.solved { metric.of(rx) } else { fail_value },
            y: if ry.solved { metric.of(ry) } else { fail_value },
            x_fail: !rx.solved,
            y_fail: !ry.solved,
        })
        .collect();
    Ok(PlotData {
        x_config: x.to_string(),
        y_config: y.to_string(),
        metric,
        fail_value,
        diagonals: vec![0.1, 1.0, 10.0],
        points,
    })
}

/// CSV with a `# ` metadata header naming the fail band and diagonals.
pub fn write_plot_csv<W: Write>(plot: &PlotData, mut out: W) -> Result<()> {
    writeln!(out, "# x={} y={} metric={:?}", plot.x_config, plot.y_config, plot.metric)?;
    writeln!(out, "# fail_value={} diagonals={:?}", plot.fail_value, plot.diagonals)?;
    let mut w = csv::Writer::from_writer(out);
    for p in &plot.points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}
