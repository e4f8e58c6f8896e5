//! Command-line interface.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pgbfs_core::domains::{DomainKind, DomainSpec};
use pgbfs_core::engine::{Algorithm, ConstraintChoice, EngineConfig, Scheduler};
use pgbfs_core::oracle::{bts_enumerate_with, bts_via_hwm, BtsSet, EnumOptions, EnumStats};

use crate::aggregate::{aggregate, to_markdown};
use crate::bench::{named_suite, parse_config, read_records_file, run_benchmark, Limits};
use crate::io::{explicit_domain, read_suite, read_topology, write_topology, write_trace_jsonl, SolveReport};
use crate::plot::{emit_plot_data, write_plot_csv, Metric};
use crate::runtime::solve;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pgbfs", version, about = "Parallel greedy best-first search engines and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one topology file and print the result as JSON.
    Solve(SolveArgs),
    /// Run a sweep and write one CSV row per run.
    Bench(BenchArgs),
    /// Compute the BTS of a topology file.
    Oracle(OracleArgs),
    /// Write a generated topology file.
    Gen(GenArgs),
    /// Aggregate a bench CSV into JSON and markdown tables.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Gbfs,
    Kpgbfs,
    Cpgbfs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConstraintArg {
    None,
    InflightMinh,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchedulerArg {
    Real,
    Deterministic,
}

#[derive(Debug, Args)]
struct EngineFlags {
    #[arg(long, value_enum, default_value = "inflight-minh")]
    constraint: ConstraintArg,
    #[arg(long, value_enum, default_value = "deterministic")]
    scheduler: SchedulerArg,
    /// Deterministic scheduler seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cost of each heuristic evaluation, in microseconds.
    #[arg(long, default_value_t = 50.0)]
    heuristic_delay_us: f64,
    #[arg(long)]
    time_limit_s: Option<f64>,
    #[arg(long)]
    mem_limit_mb: Option<u64>,
}

impl EngineFlags {
    fn constraint(&self) -> ConstraintChoice {
        match self.constraint {
            ConstraintArg::None => ConstraintChoice::None,
            ConstraintArg::InflightMinh => ConstraintChoice::InflightMinH,
        }
    }

    fn finish(&self, mut c: EngineConfig) -> EngineConfig {
        c.heuristic_delay_ns = (self.heuristic_delay_us * 1e3).round() as u64;
        c.scheduler = match self.scheduler {
            SchedulerArg::Real => Scheduler::Real,
            SchedulerArg::Deterministic => Scheduler::Deterministic { seed: self.seed },
        };
        Limits { time_limit_s: self.time_limit_s, mem_limit_mb: self.mem_limit_mb }.apply(&c)
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "cpgbfs")]
    engine: EngineArg,
    #[arg(long)]
    sge: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    engine_flags: EngineFlags,
    /// Result JSON path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the event trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Built-in suite: plateau-heavy or desk.
    #[arg(long, default_value = "plateau-heavy", conflicts_with = "input")]
    suite: String,
    /// Instances per kind for built-in suites.
    #[arg(long, default_value_t = 10)]
    instances: usize,
    /// JSON list of domain specs, instead of a built-in suite.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated `<engine>[+sge][:k]` list, e.g. `gbfs,kpgbfs:8,cpgbfs+sge:8`.
    #[arg(long, default_value = "gbfs,kpgbfs:8,kpgbfs+sge:8,cpgbfs:8,cpgbfs+sge:8")]
    engine: String,
    /// Overrides the worker count of every parallel entry in `--engine`.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    engine_flags: EngineFlags,
    #[arg(long)]
    csv: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleMethod {
    Enum,
    Hwm,
    Both,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    method: OracleMethod,
    /// Reachable-state cap for enumeration (at most 64).
    #[arg(long, default_value_t = pgbfs_core::oracle::DEFAULT_ENUM_STATE_CAP)]
    state_cap: usize,
    #[arg(long, default_value_t = pgbfs_core::oracle::DEFAULT_ENUM_BUDGET)]
    budget: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Plateau,
    Random,
    Tile,
    Grid,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Plateau chain length.
    #[arg(long, default_value_t = 4)]
    depth: u32,
    /// Plateau siblings per chain state; grid width.
    #[arg(long, default_value_t = 3)]
    width: u32,
    #[arg(long, default_value_t = 0)]
    decoy_depth: u32,
    #[arg(long, default_value_t = 12)]
    states: usize,
    #[arg(long, default_value_t = 0.25)]
    density: f64,
    #[arg(long, default_value_t = 5)]
    h_max: u64,
    #[arg(long, default_value_t = 1)]
    goals: usize,
    #[arg(long, default_value_t = 3)]
    rows: u8,
    #[arg(long, default_value_t = 3)]
    cols: u8,
    #[arg(long, default_value_t = 20)]
    scramble: u32,
    #[arg(long, default_value_t = 8)]
    height: u32,
    #[arg(long, default_value_t = 0.2)]
    obstacles: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    csv: PathBuf,
    /// Directory for report.json, report.md and plot data (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Configuration labels for the scatter plot's axes.
    #[arg(long, requires = "plot_y")]
    plot_x: Option<String>,
    #[arg(long, requires = "plot_x")]
    plot_y: Option<String>,
    /// eval_rate, expansions or wall_s.
    #[arg(long, default_value = "eval_rate")]
    metric: String,
}

/// Errors the user can fix by changing arguments or inputs.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                eprintln!("(run with --help for flag documentation)");
            }
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<i32> {
    let topo = read_topology(&a.input)?;
    let algorithm = match a.engine {
        EngineArg::Gbfs => Algorithm::Gbfs,
        EngineArg::Kpgbfs => Algorithm::Kpgbfs,
        EngineArg::Cpgbfs => Algorithm::Cpgbfs,
    };
    let base = EngineConfig {
        algorithm,
        constraint: a.engine_flags.constraint(),
        sge: a.sge,
        workers: a.threads,
        ..EngineConfig::default()
    };
    let config = a.engine_flags.finish(base);
    config.validate().map_err(|e| usage(e.to_string()))?;
    let result = solve(&topo, &config)?;
    if let Some(p) = &a.trace {
        let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_trace_jsonl(&result.trace, f)?;
    }
    let report = SolveReport::new(&result);
    write_json(&report, a.out.as_ref())?;
    Ok(if report.solved { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_bench(a: BenchArgs) -> Result<i32> {
    let suite = match &a.input {
        Some(p) => read_suite(p)?,
        None => named_suite(&a.suite, a.instances).map_err(|e| usage(e.to_string()))?,
    };
    let constraint = a.engine_flags.constraint();
    let mut configs = Vec::new();
    for item in a.engine.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let mut c = parse_config(item, &constraint).map_err(|e| usage(e.to_string()))?;
        if let (Some(k), true) = (a.threads, c.algorithm != Algorithm::Gbfs) {
            c.workers = k;
        }
        configs.push(a.engine_flags.finish(c));
    }
    if configs.is_empty() {
        return Err(usage("--engine lists no configuration"));
    }
    let file = File::create(&a.csv).with_context(|| format!("creating {}", a.csv.display()))?;
    let mut w = csv::Writer::from_writer(file);
    let records = run_benchmark(&suite, &configs, &Limits::default(), Some(&mut w))?;
    let solved = records.iter().filter(|r| r.solved).count();
    eprintln!("{} runs, {} solved, written to {}", records.len(), solved, a.csv.display());
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct OracleOutput {
    method: &'static str,
    members: Vec<u32>,
    fingerprint: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    configurations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agree: Option<bool>,
}

fn oracle_output(method: &'static str, bts: &BtsSet, stats: Option<EnumStats>) -> OracleOutput {
    OracleOutput {
        method,
        members: bts.sorted_members().iter().map(|s| s.0).collect(),
        fingerprint: format!("{:016x}", bts.topology_hash),
        configurations: stats.map(|s| s.configurations),
        budget: stats.map(|s| s.budget),
        agree: None,
    }
}

fn cmd_oracle(a: OracleArgs) -> Result<i32> {
    let topo = read_topology(&a.input)?;
    let opts = EnumOptions { state_cap: a.state_cap, budget: a.budget };
    let out = match a.method {
        OracleMethod::Enum => {
            let (bts, stats) = bts_enumerate_with(&topo, &opts)?;
            oracle_output("enum", &bts, Some(stats))
        }
        OracleMethod::Hwm => oracle_output("hwm", &bts_via_hwm(&topo)?, None),
        OracleMethod::Both => {
            let (e, stats) = bts_enumerate_with(&topo, &opts)?;
            let h = bts_via_hwm(&topo)?;
            let mut o = oracle_output("both", &e, Some(stats));
            o.agree = Some(e == h);
            if e != h {
                eprintln!("oracles disagree: enum={:?} hwm={:?}", e.sorted_members(), h.sorted_members());
            }
            o
        }
    };
    write_json(&out, a.out.as_ref())?;
    Ok(if out.agree == Some(false) { EXIT_FAILED } else { EXIT_OK })
}

fn cmd_gen(a: GenArgs) -> Result<i32> {
    let kind = match a.kind {
        GenKind::Plateau => {
            DomainKind::PlateauSynthetic { depth: a.depth, width: a.width, decoy_depth: a.decoy_depth }
        }
        GenKind::Random => DomainKind::RandomGraph {
            num_states: a.states,
            edge_density: a.density,
            h_max: a.h_max,
            goal_count: a.goals,
        },
        GenKind::Tile => DomainKind::SlidingTile { rows: a.rows, cols: a.cols, tiles: None, scramble: a.scramble },
        GenKind::Grid => DomainKind::GridNav { width: a.width, height: a.height, obstacle_density: a.obstacles },
    };
    let topo = explicit_domain(&DomainSpec::new(kind, a.seed)).map_err(|e| usage(format!("{e:#}")))?;
    write_topology(&a.out, &topo)?;
    Ok(EXIT_OK)
}

fn cmd_report(a: ReportArgs) -> Result<i32> {
    let records = read_records_file(&a.csv)?;
    if records.is_empty() {
        bail!(usage(format!("{} has no records", a.csv.display())));
    }
    let report = aggregate(&records)?;
    let md = to_markdown(&report);
    let plot = match (&a.plot_x, &a.plot_y) {
        (Some(x), Some(y)) => {
            let metric = Metric::parse(&a.metric).ok_or_else(|| usage(format!("unknown metric `{}`", a.metric)))?;
            Some(emit_plot_data(&records, x, y, metric).map_err(|e| usage(e.to_string()))?)
        }
        _ => None,
    };
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_json(&report, Some(&dir.join("report.json")))?;
            fs::write(dir.join("report.md"), &md)?;
            if let Some(p) = &plot {
                write_json(p, Some(&dir.join("plot.json")))?;
                write_plot_csv(p, File::create(dir.join("plot.csv"))?)?;
            }
        }
        None => {
            write_json(&report, None)?;
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{md}")?;
            if let Some(p) = &plot {
                write_plot_csv(p, &mut stdout)?;
            }
        }
    }
    Ok(EXIT_OK)
}
