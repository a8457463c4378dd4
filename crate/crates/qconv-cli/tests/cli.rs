use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn qconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qconv")).args(args).env_remove("QCONV_WORKERS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn witness_reports_kind_and_size() {
    let span = data("or4.json");
    let span = span.to_str().unwrap();
    let o = qconv(&["witness", "--span", span, "--input", "1100"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "kind=positive size=0.5\n");
    let o = qconv(&["witness", "--span", span, "--input", "0000"]);
    assert_eq!(stdout(&o), "kind=negative size=4\n");
    let o = qconv(&["witness", "--span", span, "--input", "0000", "--complement"]);
    assert_eq!(stdout(&o), "kind=positive size=4\n");
}

#[test]
fn bad_input_exits_with_two() {
    let span = data("or4.json");
    let o = qconv(&["witness", "--span", span.to_str().unwrap(), "--input", "10"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(qconv(&["decide", "--n", "4", "--delta", "1.5"]).status.code(), Some(2));
    assert_eq!(qconv(&["decide", "--bogus"]).status.code(), Some(2));
    assert_eq!(qconv(&["experiment"]).status.code(), Some(2));
}

#[test]
fn oversized_search_exits_with_one() {
    let o = qconv(&["experiment", "verify-search", "--n", "256", "--trials", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn decide_prints_csv_and_summary() {
    let o = qconv(&["decide", "--or", "4", "--trials", "8", "--seed", "2", "--delta", "0.2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("# qconv-csv v1 kind=decide seed=2"));
    assert_eq!(lines[1], "trial,seed,input,answer,correct,queries,rounds,wall_ms");
    assert_eq!(lines.len(), 2 + 8 + 1);
    assert!(lines[10].starts_with("# summary trials=8 "));
}

#[test]
fn output_file_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"kind": "convert", "n": 3, "trials": 4, "seed": 9}"#).unwrap();
    let o = qconv(&["experiment", "--config", cfg.to_str().unwrap(), "--output", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = std::fs::read_to_string(&csv).unwrap();
    assert!(written.starts_with("# qconv-csv v1 kind=convert seed=9 problem=or-tree-3"));
    assert_eq!(written.lines().count(), 2 + 4);
    assert!(stdout(&o).starts_with("# summary trials=4 "));
    let again = dir.path().join("again.csv");
    let o = qconv(&["experiment", "--config", cfg.to_str().unwrap(), "--output", again.to_str().unwrap(), "--workers", "1"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&again).unwrap(), written);
}

#[test]
fn graph_and_tree_files() {
    let o = qconv(&["decide", "--graph", data("four_cycle.txt").to_str().unwrap(), "--trials", "4", "--input", "1100"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("problem=st-connectivity"));
    let o = qconv(&["convert", "--tree", data("or_tree4.json").to_str().unwrap(), "--trials", "2", "--input", "0100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn quick_invariants_pass() {
    let o = qconv(&["check-invariants", "--quick", "--workers", "2"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PASS")).count() >= 10);
    assert!(out.contains("failed=0"));
}
