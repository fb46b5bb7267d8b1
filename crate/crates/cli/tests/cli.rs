use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tightham"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn gen(dir: &Path, kind: &str, n: usize, extra: &[&str], name: &str) -> String {
    let path = dir.join(name).to_string_lossy().to_string();
    let n = n.to_string();
    let mut args = vec!["gen", "--kind", kind, "--n", &n, "--out", &path];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn gen_writes_h3v1() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "complete", 5, &[], "k5.h3");
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("5 10"));
    assert_eq!(lines.next(), Some("1 2 3"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn oracle_counts_complete_graph() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "complete", 5, &[], "k5.json");
    let out = run(&["oracle", "--in", &path, "--count", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["count"], 12);
    assert_eq!(v["command"], "oracle");
}

#[test]
fn expect_cycle_fails_on_extremal_example() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "example-one-third", 9, &[], "e9.h3");
    let out = run(&["oracle", "--in", &path, "--expect-cycle"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["oracle", "--in", &path]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["oracle", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().to_string();
    let scan = run(&[
        "scan",
        "--n",
        "40",
        "--family",
        "constant",
        "--values",
        "0",
        "--out-dir",
        &out,
    ]);
    assert_eq!(scan.status.code(), Some(2));
}

#[test]
fn check_reports_posa_condition() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "random-posa", 24, &["--alpha", "0.15"], "p.h3");
    let out = run(&["check", "--in", &path, "--alpha", "0.15", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let e = gen(dir.path(), "example-half", 10, &[], "e.h3");
    assert_eq!(run(&["check", "--in", &e, "--alpha", "0.1"]).status.code(), Some(1));
}

#[test]
fn pipeline_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "complete", 80, &[], "k80.h3");
    let args = [
        "pipeline",
        "--in",
        &path,
        "--alpha",
        "0.2",
        "--theta",
        "0.4",
        "--L",
        "5",
        "--s",
        "4",
        "--capacity",
        "1",
        "--seed",
        "7",
        "--json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stdout));
    let (mut ra, mut rb) = (json(&a), json(&b));
    assert_eq!(ra["success"], true);
    assert!(ra["certificate"].is_array());
    ra.as_object_mut().unwrap().remove("timing");
    rb.as_object_mut().unwrap().remove("timing");
    assert_eq!(serde_json::to_string(&ra).unwrap(), serde_json::to_string(&rb).unwrap());
}

#[test]
fn pipeline_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen(dir.path(), "example-half", 10, &[], "e.h3");
    let out = run(&[
        "pipeline", "--in", &path, "--alpha", "0.2", "--theta", "0.95", "--L", "3", "--s", "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn scan_writes_csv_and_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("scan");
    let od = out_dir.to_string_lossy().to_string();
    let out = run(&[
        "scan",
        "--n",
        "6",
        "--family",
        "min-shift",
        "--caps",
        "3",
        "--shifts",
        "-1,6",
        "--out-dir",
        &od,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(out_dir.join("scan.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["matrix_id", "classification", "witness_file", "oracle_nodes", "seconds"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(&rows[0][1], "counterexample_found");
    assert!(out_dir.join(&rows[0][2]).exists());
    assert_eq!(&rows[1][1], "no_counterexample_within_budget");
    assert_eq!(&rows[1][2], "");
}
