//! The binary end to end: exit codes, output shapes and rate tables on disk.

use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn fbdp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbdp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = fbdp(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["pmf", "--alpha", "1.5"][..],
        &["pmf", "--model", "linear:1"],
        &["pmf", "--t", "0:1:x"],
        &["pmf", "--method", "uniformization", "--alpha", "0.5", "--model", "linear:1,2"],
        &["bogus"],
    ] {
        let out = fbdp(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn pmf_rows_at_t_zero() {
    let rows = json(&["pmf", "--model", "linear:1,2", "--alpha", "0.6", "--t", "0", "--n", "0..3", "--format", "json"]);
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows {
        let want = if r["n"] == 1 { 1.0 } else { 0.0 };
        assert_eq!(r["value"].as_f64().unwrap(), want);
        assert_eq!(r["method"], "closed-form");
    }
}

#[test]
fn csv_has_header_and_one_row_per_point() {
    let out = fbdp(&["pmf", "--model", "linear:0.5,1", "--t", "0.5:2:4lin", "--n", "0..2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,t,method,value,stderr,flags"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn table_model_from_file_matches_linear() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "n,lambda,mu").unwrap();
    for n in 0..=60 {
        writeln!(f, "{n},{},{}", 0.5 * n as f64, n as f64).unwrap();
    }
    f.flush().unwrap();
    let spec = format!("table:{}", f.path().display());
    let table = json(&["pmf", "--model", &spec, "--t", "0.2", "--n", "0..3", "--format", "json"]);
    let linear = json(&["pmf", "--model", "linear:0.5,1", "--t", "0.2", "--n", "0..3", "--format", "json"]);
    for (a, b) in table.as_array().unwrap().iter().zip(linear.as_array().unwrap()) {
        assert_eq!(a["method"], "adm");
        let (x, y) = (a["value"].as_f64().unwrap(), b["value"].as_f64().unwrap());
        assert!((x - y).abs() < 1e-10, "{x} vs {y}");
    }
}

#[test]
fn malformed_table_is_reported() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "n,lambda,mu\n0,0,0\n2,1,1").unwrap();
    f.flush().unwrap();
    let spec = format!("table:{}", f.path().display());
    let out = fbdp(&["pmf", "--model", &spec]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn validate_report_shape() {
    let r = json(&["validate", "--seed", "7", "--fast"]);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["passed"], true);
    assert_eq!(r["criteria"].as_array().unwrap().len(), 12);
}

#[test]
fn injected_fault_fails_validation() {
    let out = fbdp(&["validate", "--fast", "--inject-fault"]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["passed"], false);
    assert_eq!(r["criteria"][0]["passed"], false);
}
