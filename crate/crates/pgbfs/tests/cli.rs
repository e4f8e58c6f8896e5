use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pgbfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pgbfs")).args(args).output().unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_fixture_with_sge() {
    let f = fixture("plateau_d4_x3.topo");
    let out = pgbfs(&["solve", "--input", &f, "--engine", "cpgbfs", "--constraint", "inflight-minh", "--sge", "--threads", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["solved"], true);
    assert_eq!(v["path"], serde_json::json!([0, 1, 2, 3, 4]));
    for key in ["expansions", "evaluations", "wasted_evaluations", "wall_seconds", "peak_open", "idle_seconds"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[test]
fn solve_failure_exits_one_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("u.topo");
    std::fs::write(&topo, "state 0 h=1 init\nstate 1 h=1\nstate 2 h=0 goal\nedge 0 1\nedge 1 0\n").unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = pgbfs(&["solve", "--input", p(&topo), "--engine", "kpgbfs", "--threads", "2", "--trace", p(&trace)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["outcome"], "unsolvable");
    let lines = std::fs::read_to_string(&trace).unwrap();
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert!(first.get("event").is_some() && first.get("seq").is_some());
}

#[test]
fn gen_then_oracle_agree() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.topo");
    let out = pgbfs(&["gen", "--kind", "plateau", "--depth", "4", "--width", "3", "--seed", "1", "--out", p(&t)]);
    assert_eq!(out.status.code(), Some(0));
    let bts = dir.path().join("bts.json");
    let out = pgbfs(&["oracle", "--input", p(&t), "--method", "both", "--out", p(&bts)]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&bts).unwrap()).unwrap();
    assert_eq!(v["agree"], true);
    assert_eq!(v["members"], serde_json::json!([0, 1, 2, 3, 4]));
    assert_eq!(v["method"], "both");
    assert!(v["fingerprint"].is_string() && v["configurations"].is_u64() && v["budget"].is_u64());
    // same spec, same bytes
    let t2 = dir.path().join("t2.topo");
    pgbfs(&["gen", "--kind", "plateau", "--depth", "4", "--width", "3", "--seed", "1", "--out", p(&t2)]);
    assert_eq!(std::fs::read(&t).unwrap(), std::fs::read(&t2).unwrap());
}

#[test]
fn report_on_empty_csv_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(pgbfs(&["report", "--csv", p(&empty)]).status.code(), Some(2));
    let header_only = dir.path().join("h.csv");
    std::fs::write(&header_only, pgbfs::bench::CSV_COLUMNS.join(",") + "\n").unwrap();
    assert_eq!(pgbfs(&["report", "--csv", p(&header_only)]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(pgbfs(&[]).status.code(), Some(2));
    assert_eq!(pgbfs(&["solve"]).status.code(), Some(2));
    assert_eq!(pgbfs(&["solve", "--input", "x", "--engine", "astar"]).status.code(), Some(2));
    let out = pgbfs(&["solve", "--input", &fixture("single.topo"), "--engine", "gbfs", "--threads", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(pgbfs(&["--help"]).status.code(), Some(0));
    let out = pgbfs(&["bench", "--csv", "/dev/null", "--engine", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--help"));
}

#[test]
fn bench_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let out = pgbfs(&[
        "bench", "--suite", "plateau-heavy", "--instances", "3", "--engine", "gbfs,kpgbfs:4,kpgbfs+sge:4",
        "--heuristic-delay-us", "100", "--csv", p(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = pgbfs::bench::read_records_file(&csv).unwrap();
    assert_eq!(recs.len(), 9);
    let rep = dir.path().join("rep");
    let out = pgbfs(&["report", "--csv", p(&csv), "--out", p(&rep), "--plot-x", "kpgbfs/k4", "--plot-y", "kpgbfs+sge/k4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(rep.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["common_solved"], 3);
    let md = std::fs::read_to_string(rep.join("report.md")).unwrap();
    assert!(md.contains("1a.") && md.contains("2b."));
    let plot = std::fs::read_to_string(rep.join("plot.csv")).unwrap();
    assert!(plot.contains("diagonals=[0.1, 1.0, 10.0]"));
    let out = pgbfs(&["report", "--csv", p(&csv), "--plot-x", "nope/k1", "--plot-y", "kpgbfs/k4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_from_a_suite_file() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    let file = fixture("nonmonotone.topo");
    std::fs::write(
        &suite,
        format!(r#"[{{"kind":"explicit-file","path":"{file}"}},{{"kind":"sliding-tile","rows":2,"cols":3,"scramble":12,"seed":4}}]"#),
    )
    .unwrap();
    let csv = dir.path().join("r.csv");
    let out = pgbfs(&["bench", "--input", p(&suite), "--engine", "gbfs,cpgbfs+sge:2", "--csv", p(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = pgbfs::bench::read_records_file(&csv).unwrap();
    assert_eq!(recs.len(), 4);
    assert!(recs.iter().all(|r| r.solved), "{recs:?}");
}
