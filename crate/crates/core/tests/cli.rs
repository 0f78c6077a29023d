use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use uniformity_lab::counting::{lambda, CountingParams};
use uniformity_lab::funcspace::indicator;
use uniformity_lab::gowers::{gowers_norm, GowersDegree};
use uniformity_lab::io::read_function;
use uniformity_lab::localfn::LocalFunction;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uniformity-lab"))
        .args(args)
        .output()
        .expect("runs the CLI")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn ones(n: i64) -> String {
    let pts: Vec<String> = (1..=n).map(|x| format!(r#"{{"x": {x}, "re": 1.0}}"#)).collect();
    format!("[{}]", pts.join(", "))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gowers_of_delta_and_zero() {
    let dir = tempfile::tempdir().unwrap();
    let delta = write(dir.path(), "delta.json", r#"[{"x": 0, "re": 1.0}]"#);
    let zero = write(dir.path(), "zero.json", "[]");
    let out = run(&["gowers", "--function", s(&delta), "--s", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["norm"], 1.0);
    assert_eq!(v["power"], 1.0);
    let out = run(&["gowers", "--function", s(&zero), "--s", "2", "--format", "text"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0");
}

#[test]
fn gowers_output_equals_library_call() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "f.json",
        r#"[{"x": 1, "re": 0.5, "im": 0.5}, {"x": 2, "re": -1.0}, {"x": 5, "re": 0.25, "im": -0.75}]"#,
    );
    let f = read_function(&path).unwrap();
    for deg in 1..=3 {
        let out = run(&["gowers", "--function", s(&path), "--s", &deg.to_string()]);
        let v = json(&out);
        assert_eq!(v["norm"].as_f64().unwrap(), gowers_norm(&f, GowersDegree::new(deg).unwrap()));
    }
    let out = run(&["gowers", "--function", s(&path), "--s", "1", "--q", "2", "--u", "1"]);
    let v = json(&out);
    assert_eq!((v["q"].as_u64(), v["u"].as_i64()), (Some(2), Some(1)));
}

#[test]
fn lambda_of_ones_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let all = write(dir.path(), "ones.json", &ones(4));
    let out = run(&["lambda", "--q", "1", "--N", "4", "--f0", s(&all), "--f1", s(&all), "--f2", s(&all)]);
    assert!(out.status.success());
    assert_eq!(json(&out)["re"], 0.375);

    // x = 2, y = 3, q = 1: 2, 5, 11 inside N = 12 with M = 3
    let a = write(dir.path(), "a.json", r#"[{"x": 2, "re": 1.0}]"#);
    let b = write(dir.path(), "b.json", r#"[{"x": 5, "re": 1.0}]"#);
    let c = write(dir.path(), "c.json", r#"[{"x": 11, "re": 1.0}]"#);
    let out = run(&["lambda", "--q", "1", "--N", "12", "--f0", s(&a), "--f1", s(&b), "--f2", s(&c)]);
    assert_eq!(json(&out)["re"].as_f64().unwrap(), 1.0 / 36.0);

    let zero = write(dir.path(), "zero.json", "[]");
    let out = run(&["lambda", "--q", "1", "--N", "4", "--f0", s(&zero), "--f1", s(&all), "--f2", s(&all)]);
    assert_eq!(json(&out)["abs"], 0.0);
}

#[test]
fn cut_norm_mode_matches_the_count_for_an_interval() {
    let dir = tempfile::tempdir().unwrap();
    let all = write(dir.path(), "ones.json", &ones(16));
    let out = run(&["lambda", "--q", "1", "--N", "16", "--f2", s(&all), "--mode", "cut-norm", "--restarts", "2"]);
    assert!(out.status.success());
    let p = CountingParams::new(1, 16).unwrap();
    let one = indicator(p.domain());
    let exact = lambda(&p, &one, &one, &one).norm();
    assert!((json(&out)["lower"].as_f64().unwrap() - exact).abs() < 1e-12);
}

#[test]
fn harness_default_run_exits_zero_and_replays() {
    let first = run(&["harness", "--trials", "2"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = run(&["harness", "--trials", "2"]);
    assert_eq!(first.stdout, second.stdout);
    let lines: Vec<Value> = String::from_utf8_lossy(&first.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    let summary: Value = serde_json::from_slice(&first.stderr).unwrap();
    assert_eq!(summary["checks"].as_u64().unwrap() as usize, lines.len());
    assert_eq!(lines.len(), 21 * 3 * 2);
}

#[test]
fn harness_rejects_unknown_lemmas() {
    let out = run(&["harness", "--lemmas", "VDC,NOT_A_LEMMA"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"lemmas": ["BOGUS"]}"#);
    let out = run(&["harness", "--config", s(&cfg)]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn search_rows_match_requested_sizes() {
    let out = run(&["search", "--q", "1", "--N", "1,2,3,4,5,6"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1 + 6);
    assert!(rows[1].starts_with("1,1,1,"), "{}", rows[1]);
    assert!(rows[6].starts_with("6,1,3,"), "{}", rows[6]);
}

#[test]
fn count_reports_configurations_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let set = write(dir.path(), "set.json", "[1, 2, 5, 7]");
    let out = run(&["count", "--q", "1", "--N", "8", "--set", s(&set)]);
    let v = json(&out);
    // only x = 1, y = 1 (points 1, 2, 2); y = 2 needs x, x + 2, x + 4
    assert_eq!(v["count"], 1);
    assert!(!v["witness"].is_null());
}

#[test]
fn extract_writes_a_local_function_that_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let all = write(dir.path(), "ones.json", &ones(100));
    let local = dir.path().join("local.json");
    let out = run(&[
        "extract", "--q", "1", "--N", "100", "--delta", "0.5", "--f", s(&all), "--g0", s(&all), "--g1", s(&all),
        "--out", s(&local),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let from_file: LocalFunction = serde_json::from_str(&std::fs::read_to_string(&local).unwrap()).unwrap();
    let from_stdout: LocalFunction = serde_json::from_value(v["local"].clone()).unwrap();
    assert_eq!(from_file, from_stdout);
    let mut corr = 0.0;
    for x in 1..=100 {
        corr += from_file.eval(x).re;
    }
    assert!((corr - v["correlation"]["re"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn extract_on_zero_function_reports_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let all = write(dir.path(), "ones.json", &ones(100));
    let zero = write(dir.path(), "zero.json", "[]");
    let out = run(&["extract", "--q", "1", "--N", "100", "--delta", "0.5", "--f", s(&zero), "--g0", s(&all), "--g1", s(&all)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["stage"].is_string());
}

#[test]
fn io_and_usage_errors_have_distinct_codes() {
    let out = run(&["gowers", "--function", "/no/such/file.json", "--s", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
    let out = run(&["gowers", "--s", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{not json");
    let out = run(&["gowers", "--function", s(&bad), "--s", "2"]);
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_uniformity-lab"))
        .args(["search", "--q", "1", "--N", "5"])
        .env("UNIFORMITY_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
