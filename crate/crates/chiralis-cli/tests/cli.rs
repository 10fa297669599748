//! End-to-end tests of the `chiralis` binary: real process spawns, real
//! files, exact expectations on output and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chiralis"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("no signal")
}

/// Writes an input description into a fresh temp dir and returns its path.
fn input_file(dir: &TempDir, text: &str) -> PathBuf {
    let path = dir.path().join("input.txt");
    std::fs::write(&path, text).expect("writable temp dir");
    path
}

const X_SQUARED: &str = "var x even inner=1\nrel x^2\n";

#[test]
fn fatpoint_prints_the_kernel_table_and_h0() {
    let out = run(&["weyl", "fatpoint", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("H0 dim = 4"), "{text}");
    // The kernel dimensions in the table sum to n².
    let sum: i64 = text
        .lines()
        .skip(1)
        .take_while(|l| !l.starts_with("H0"))
        .map(|l| l.split_whitespace().last().unwrap().parse::<i64>().unwrap())
        .sum();
    assert_eq!(sum, 4);
}

#[test]
fn fatpoint_json_carries_the_same_numbers() {
    let out = run(&["weyl", "fatpoint", "--n", "3", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["meta"]["h0_dim"], Value::from(9));
    let sum: u64 = doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["kernel_dim"].as_u64().unwrap())
        .sum();
    assert_eq!(sum, 9);
}

#[test]
fn total_cohomology_of_the_fat_point_is_a_point() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, X_SQUARED);
    let out = run(&[
        "cdo", "cohomology", "--flavor", "derham", "--diff", "total",
        "-W", "3", "-D", "6", "--format", "json", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["weight"], Value::from(0));
    assert_eq!(entries[0]["inner"], Value::from(0));
    assert_eq!(entries[0]["coh"], Value::from(0));
    assert_eq!(entries[0]["dim"], Value::from(1));
}

#[test]
fn verify_passes_on_the_fat_point() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, X_SQUARED);
    let out = run(&["cdo", "verify", "-W", "3", "-D", "4", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("verify: PASS"), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
    for check in [
        "square-zero (koszul differential)",
        "mode commutators",
        "square-zero (de Rham + koszul)",
        "homotopy identities",
        "identity lift (plain)",
        "identity lift (de Rham)",
    ] {
        assert!(text.contains(check), "missing {check}: {text}");
    }
}

#[test]
fn character_check_passes_on_the_fat_point() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, X_SQUARED);
    let out = run(&["cdo", "character", "-W", "2", "-D", "3", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("character: PASS"));
}

#[test]
fn operator_cohomology_matches_the_fat_point_count() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, X_SQUARED);
    let out = run(&["weyl", "cohomology", "-D", "4", "--format", "json", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["meta"]["h0_total"], Value::from(4));
}

#[test]
fn minimize_drops_the_linear_relation_and_preserves_cohomology() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, "var x even inner=1\nvar y even inner=1\nrel x\nrel y^2\n");
    let out = run(&["koszul", "minimize", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("var y even inner=1"), "{text}");
    assert!(!text.contains("var x"), "{text}");

    // The minimized output is valid input; its weight-zero Koszul cohomology
    // agrees with the original's.
    let reduced = dir.path().join("reduced.txt");
    std::fs::write(&reduced, &text).unwrap();
    let table = |p: &str| {
        let out = run(&[
            "cdo", "cohomology", "--flavor", "plain", "--diff", "koszul",
            "-W", "0", "-D", "6", "--format", "json", p,
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
        doc["entries"].clone()
    };
    assert_eq!(table(path.to_str().unwrap()), table(reduced.to_str().unwrap()));
}

#[test]
fn coh_range_restricts_the_table() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, X_SQUARED);
    let full = run(&[
        "cdo", "cohomology", "-W", "1", "-D", "4", "--format", "json", path.to_str().unwrap(),
    ]);
    let restricted = run(&[
        "cdo", "cohomology", "-W", "1", "-D", "4", "--coh-range", "0..0", "--format", "json",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&full), 0);
    assert_eq!(code(&restricted), 0);
    let full: Value = serde_json::from_str(&stdout(&full)).unwrap();
    let restricted: Value = serde_json::from_str(&stdout(&restricted)).unwrap();
    let expected: Vec<Value> = full["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["coh"] == Value::from(0))
        .cloned()
        .collect();
    assert_eq!(restricted["entries"].as_array().unwrap(), &expected);
    assert!(!expected.is_empty());
}

#[test]
fn output_is_deterministic_across_runs_and_thread_caps() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, X_SQUARED);
    let args =
        ["cdo", "cohomology", "-W", "1", "-D", "3", "--format", "json", path.to_str().unwrap()];
    let base = run(&args);
    assert_eq!(code(&base), 0);
    let again = run(&args);
    assert_eq!(stdout(&base), stdout(&again));
    for cap in ["1", "2", "8"] {
        let capped = bin().args(args).env("CHIRALIS_THREADS", cap).output().unwrap();
        assert_eq!(code(&capped), 0);
        assert_eq!(stdout(&base), stdout(&capped), "thread cap {cap}");
    }
}

#[test]
fn unknown_variable_is_an_input_error_with_position() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, "rel x^2\n");
    let out = run(&["cdo", "cohomology", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("unknown variable x"), "{err}");
    assert!(err.contains("line 1, col 5"), "{err}");
}

#[test]
fn duplicate_variable_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, "var x even inner=1\nvar x odd inner=2\nrel x^2\n");
    let out = run(&["koszul", "minimize", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("duplicate variable `x`"));
}

#[test]
fn inhomogeneous_relation_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, "var x even inner=1\nrel x^2 + x\n");
    let out = run(&["cdo", "verify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 2"), "{err}");
    assert!(err.contains("homogeneous"), "{err}");
}

#[test]
fn missing_file_is_an_input_error() {
    let out = run(&["cdo", "verify", "/nonexistent/input.txt"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bad_flags_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let path = input_file(&dir, X_SQUARED);
    let p = path.to_str().unwrap();
    assert_eq!(code(&run(&["cdo", "cohomology", "-W", "-1", p])), 2);
    assert_eq!(code(&run(&["weyl", "fatpoint", "--n", "0"])), 2);
    assert_eq!(code(&run(&["cdo", "cohomology", "--coh-range", "5..1", p])), 2);
    assert_eq!(code(&run(&["cdo", "cohomology", "--diff", "ddr", p])), 2);
    let capped = bin()
        .args(["cdo", "cohomology", p])
        .env("CHIRALIS_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&capped), 2);
}
