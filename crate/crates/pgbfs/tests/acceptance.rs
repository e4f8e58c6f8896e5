//! One PASS/FAIL line per acceptance criterion. Exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use pgbfs::aggregate::{aggregate, geometric_mean};
use pgbfs::bench::{plateau_heavy_suite, read_records_file, run_benchmark, sge_comparison_configs, Limits};
use pgbfs::io::{read_topology, trace_digest, write_trace_jsonl};
use pgbfs_core::domains::{gen_plateau, gen_random, RandomParams};
use pgbfs_core::engine::{deterministic_run, gbfs_sequential, ConstraintChoice, EngineConfig, SearchTrace};
use pgbfs_core::oracle::{bts_enumerate_with, bts_via_hwm, check_trace_constrained, BtsSet, EnumOptions, OracleError};
use pgbfs_core::ExplicitTopology;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn fixtures() -> Vec<(String, ExplicitTopology)> {
    let mut v: Vec<_> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "topo"))
        .collect();
    v.sort();
    v.into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), read_topology(&p).unwrap()))
        .collect()
}

fn sample(rng: &mut StdRng, max_states: usize) -> ExplicitTopology {
    let params = RandomParams {
        num_states: rng.gen_range(2..=max_states),
        edge_density: rng.gen_range(0.08..0.4),
        h_max: rng.gen_range(1..=6),
        goal_count: rng.gen_range(1..=3),
    };
    gen_random(&params, rng.gen()).unwrap()
}

/// Enumeration when it fits, the structural construction otherwise.
fn bts_of(t: &ExplicitTopology) -> (BtsSet, &'static str) {
    let opts = EnumOptions { state_cap: 64, ..EnumOptions::default() };
    match bts_enumerate_with(t, &opts) {
        Ok((b, _)) => (b, "enum"),
        Err(OracleError::TooLarge { .. } | OracleError::Inconclusive { .. }) => (bts_via_hwm(t).unwrap(), "hwm"),
        Err(e) => panic!("{e}"),
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_bts_constrained() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut instances: Vec<(String, ExplicitTopology)> =
        (0..200).map(|i| (format!("random#{i}"), sample(&mut rng, 30))).collect();
    instances.extend(fixtures());
    let (mut runs, mut via_hwm) = (0, 0);
    for (name, t) in &instances {
        let (bts, how) = bts_of(t);
        via_hwm += (how == "hwm") as usize;
        for k in [2, 4, 8] {
            for sge in [false, true] {
                for seed in 0..32 {
                    let cfg = EngineConfig::cpgbfs(k, ConstraintChoice::InflightMinH).with_sge(sge).with_seed(seed);
                    let r = deterministic_run(t, &cfg).map_err(|e| format!("{name}: {e}"))?;
                    let rep = check_trace_constrained(&r.trace, &bts).map_err(|e| e.to_string())?;
                    ensure(rep.passed(), || format!("{name} k={k} sge={sge} seed={seed}: {:?}", rep.violations))?;
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("{runs} runs on {} topologies, 0 violations ({via_hwm} checked against the structural BTS)", instances.len()))
}

fn c2_dual_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    for i in 0..100 {
        let t = sample(&mut rng, 12);
        let (e, _) = bts_enumerate_with(&t, &EnumOptions::default()).map_err(|e| format!("#{i}: {e}"))?;
        let h = bts_via_hwm(&t).map_err(|e| format!("#{i}: {e}"))?;
        ensure(e == h, || format!("#{i}: enum {:?} vs hwm {:?}", e.sorted_members(), h.sorted_members()))?;
    }
    Ok("100 of 100 agree".into())
}

fn c3_single_worker() -> Outcome {
    let variants = [
        ("kpgbfs", EngineConfig::kpgbfs(1)),
        ("kpgbfs+sge", EngineConfig::kpgbfs(1).with_sge(true)),
        ("cpgbfs(none)", EngineConfig::cpgbfs(1, ConstraintChoice::None)),
        ("cpgbfs(none)+sge", EngineConfig::cpgbfs(1, ConstraintChoice::None).with_sge(true)),
        ("cpgbfs(inflight-minh)", EngineConfig::cpgbfs(1, ConstraintChoice::InflightMinH)),
        ("cpgbfs(inflight-minh)+sge", EngineConfig::cpgbfs(1, ConstraintChoice::InflightMinH).with_sge(true)),
    ];
    let fx = fixtures();
    for (name, t) in &fx {
        let reference = format!("{:?}", gbfs_sequential(t, &EngineConfig::gbfs()).unwrap().trace.expansion_sequence());
        for (label, cfg) in &variants {
            for seed in 0..4 {
                let r = deterministic_run(t, &cfg.clone().with_seed(seed)).map_err(|e| e.to_string())?;
                let got = format!("{:?}", r.trace.expansion_sequence());
                ensure(got == reference, || format!("{name} {label} seed={seed}: {got} != {reference}"))?;
            }
        }
    }
    Ok(format!("{} variants x {} fixtures identical to sequential GBFS", variants.len(), fx.len()))
}

fn c4_utilization() -> Outcome {
    let t = gen_plateau(5, 7, 0);
    let mut seen = Vec::new();
    for (sge, expected) in [(true, 8), (false, 1)] {
        let cfg = EngineConfig::cpgbfs(8, ConstraintChoice::InflightMinH).with_sge(sge).with_delay_ns(50_000);
        let r = deterministic_run(&t, &cfg).map_err(|e| e.to_string())?;
        let peak = r.trace.peak_concurrent_evaluations();
        ensure(peak == expected, || format!("sge={sge}: peak {peak}, expected {expected}"))?;
        seen.push(peak);
    }
    Ok(format!("peak concurrent evaluations {} with SGE, {} without", seen[0], seen[1]))
}

struct SuiteRatios {
    constrained_rate: f64,
    kpgbfs_rate: f64,
    constrained_expansions: f64,
}

fn plateau_suite_ratios() -> Result<SuiteRatios, String> {
    let suite = plateau_heavy_suite(10);
    let configs = sge_comparison_configs(8, 100_000, 0);
    let recs = run_benchmark::<Vec<u8>>(&suite, &configs, &Limits::default(), None).map_err(|e| e.to_string())?;
    let rep = aggregate(&recs).map_err(|e| e.to_string())?;
    let get = |label: &str| rep.config(label).ok_or_else(|| format!("missing {label}"));
    let cp = get("cpgbfs(inflight-minh)/k8")?;
    let cps = get("cpgbfs(inflight-minh)+sge/k8")?;
    let kp = get("kpgbfs/k8")?;
    let kps = get("kpgbfs+sge/k8")?;
    let ratio = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => Ok(a / b),
        _ => Err("means undefined".to_string()),
    };
    Ok(SuiteRatios {
        constrained_rate: ratio(cps.eval_rate, cp.eval_rate)?,
        kpgbfs_rate: ratio(kps.eval_rate, kp.eval_rate)?,
        constrained_expansions: ratio(cps.expansions, cp.expansions)?,
    })
}

fn c5_eval_rate() -> Outcome {
    let r = plateau_suite_ratios()?;
    ensure(r.constrained_rate >= 1.10, || format!("constrained+SGE/constrained = {:.3} < 1.10", r.constrained_rate))?;
    ensure((0.70..=1.05).contains(&r.kpgbfs_rate), || format!("KPGBFS+SGE/KPGBFS = {:.3} outside [0.70, 1.05]", r.kpgbfs_rate))?;
    Ok(format!("constrained+SGE/constrained = {:.3}, KPGBFS+SGE/KPGBFS = {:.3}", r.constrained_rate, r.kpgbfs_rate))
}

fn c6_expansions() -> Outcome {
    let r = plateau_suite_ratios()?;
    ensure(r.constrained_expansions <= 1.10, || format!("expansions ratio {:.3} > 1.10", r.constrained_expansions))?;
    Ok(format!("constrained expansions with/without SGE = {:.3}", r.constrained_expansions))
}

fn c7_non_monotone() -> Outcome {
    let t = read_topology(&fixture_dir().join("nonmonotone.topo")).map_err(|e| e.to_string())?;
    let seed = 0;
    let one = deterministic_run(&t, &EngineConfig::kpgbfs(1).with_seed(seed)).unwrap().stats.expansions;
    let two = deterministic_run(&t, &EngineConfig::kpgbfs(2).with_seed(seed)).unwrap().stats.expansions;
    ensure(two > one, || format!("k=2 expanded {two}, k=1 expanded {one}"))?;
    Ok(format!("nonmonotone.topo seed {seed}: k=1 expands {one}, k=2 expands {two}"))
}

fn jsonl(trace: &SearchTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace_jsonl(trace, &mut buf).unwrap();
    buf
}

fn c8_determinism() -> Outcome {
    let fixture = fixture_dir().join("plateau_decoy_d6_x3_t2.topo");
    let t = read_topology(&fixture).map_err(|e| e.to_string())?;
    let cfg = EngineConfig::cpgbfs(4, ConstraintChoice::InflightMinH).with_sge(true).with_seed(17);
    let first = jsonl(&deterministic_run(&t, &cfg).unwrap().trace);
    for i in 1..10 {
        let again = jsonl(&deterministic_run(&t, &cfg).unwrap().trace);
        ensure(again == first, || format!("repetition {i} differs"))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for i in 0..2 {
        let path = dir.path().join(format!("trace{i}.jsonl"));
        let status = Command::new(env!("CARGO_BIN_EXE_pgbfs"))
            .args(["solve", "--engine", "cpgbfs", "--constraint", "inflight-minh", "--sge", "--threads", "4"])
            .args(["--seed", "17", "--heuristic-delay-us", "50", "--input"])
            .arg(&fixture)
            .arg("--trace")
            .arg(&path)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(status.status.success(), || format!("solve exited with {:?}", status.status.code()))?;
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        ensure(bytes == first, || format!("process {i} wrote a different trace"))?;
    }
    let digest = trace_digest(&deterministic_run(&t, &cfg).unwrap().trace);
    let events = first.iter().filter(|&&b| b == b'\n').count();
    Ok(format!("{events} events identical over 10 runs and 2 fresh processes (sha256 {}..)", &digest[..12]))
}

fn c9_metrics() -> Outcome {
    let mut rng = StdRng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=30);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.25..4.0)).collect();
        let direct = v.iter().product::<f64>().powf(1.0 / n as f64);
        let gm = geometric_mean(&v).map_err(|e| e.to_string())?;
        worst = worst.max(((gm - direct) / direct).abs());
    }
    ensure(worst < 1e-12, || format!("relative error {worst:e}"))?;

    let recs = read_records_file(&fixture_dir().join("crafted_six.csv")).map_err(|e| e.to_string())?;
    ensure(recs.len() == 6, || format!("{} records", recs.len()))?;
    for r in &recs {
        let rate = r.evaluations as f64 / r.wall_s;
        ensure((rate - r.eval_rate).abs() <= 1e-9 * rate, || format!("{}: eval_rate mismatch", r.domain))?;
    }
    let rep = aggregate(&recs).map_err(|e| e.to_string())?;
    let plain = rep.config("cpgbfs(inflight-minh)/k16").ok_or("missing plain config")?;
    let sge = rep.config("cpgbfs(inflight-minh)+sge/k16").ok_or("missing sge config")?;
    let close = |a: Option<f64>, b: f64| a.is_some_and(|a| (a - b).abs() <= 1e-9 * b.max(1.0));
    ensure(rep.common_solved == 2, || format!("common {}", rep.common_solved))?;
    ensure(close(plain.eval_rate, 33632.0) && close(sge.eval_rate, 40097.0), || {
        format!("rates {:?} {:?}", plain.eval_rate, sge.eval_rate)
    })?;
    ensure(close(plain.expansions, 100.0) && close(sge.expansions, 10.0), || "expansion means".into())?;
    ensure(close(plain.search_time_s, 1.0) && close(sge.search_time_s, 1.0), || "search time means".into())?;
    ensure(plain.coverage == 3 && sge.coverage == 2 && rep.pairwise == vec![vec![0, 1], vec![0, 0]], || {
        "coverage or pairwise matrix".into()
    })?;
    let ratio = sge.eval_rate.unwrap() / plain.eval_rate.unwrap();
    ensure(format!("{ratio:.2}") == "1.19", || format!("ratio {ratio}"))?;
    Ok(format!("max relative error {worst:.1e}; crafted CSV means match, 33632 -> 40097 gives {ratio:.2}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("BTS-constrainedness", c1_bts_constrained, 180),
        ("dual-oracle agreement", c2_dual_oracle, 60),
        ("k=1 reduction", c3_single_worker, 30),
        ("utilization min(b,k)", c4_utilization, 60),
        ("evaluation-rate direction", c5_eval_rate, 300),
        ("expansion-count direction", c6_expansions, 300),
        ("non-monotonicity exhibit", c7_non_monotone, 60),
        ("determinism", c8_determinism, 60),
        ("metric arithmetic", c9_metrics, 60),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let res = res.and_then(|d| {
            if took > Duration::from_secs(*budget) {
                Err(format!("{d}; took {:.1}s, budget {budget}s", took.as_secs_f64()))
            } else {
                Ok(d)
            }
        });
        match res {
            Ok(detail) => println!("PASS {} {name}: {detail} [{:.2}s]", i + 1, took.as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{:.2}s]", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
