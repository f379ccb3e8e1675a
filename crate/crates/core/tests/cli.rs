//! End-to-end checks of the `implode` binary: outputs, manifests and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn implode(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_implode"))
        .args(["--quiet", "--out"])
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn zero_order_coefficients_give_a_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = implode(dir.path(), &["coeffs", "--N", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("coeffs_limit.csv")).unwrap();
    let rows: Vec<_> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("0,0/1 + 0/1*sqrt(15),"));
    let m = manifest(dir.path());
    assert_eq!(m["success"], true);
    assert_eq!(m["command"], "coeffs");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 1);
    // stdout carries the same manifest.
    let printed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(printed["config_hash"], m["config_hash"]);
}

#[test]
fn json_format_writes_json_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = implode(dir.path(), &["--format", "json", "coeffs", "--N", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("coeffs_limit.json")).unwrap()).unwrap();
    assert!(v.to_string().contains("sqrt(15)"));
}

#[test]
fn even_shooting_order_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = implode(dir.path(), &["shoot", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n must be odd"));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_implode"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .args(["coeffs", "--N", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field"));
}

#[test]
fn config_file_values_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "N = 3\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_implode"))
        .arg("--quiet")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .arg("coeffs")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("coeffs_limit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn corrupted_coefficient_fails_verification_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = implode(dir.path(), &["verify", "induction", "--corrupt", "200", "--mutations", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let report = std::fs::read_to_string(dir.path().join("induction_report.json")).unwrap();
    assert!(report.contains("\"witness\": \"n=200\""));
    assert_eq!(manifest(dir.path())["success"], false);
}

#[test]
fn barrier_verification_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = implode(dir.path(), &["verify", "barriers"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("barrier_report.json").exists());
}

#[test]
fn bad_arguments_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = implode(dir.path(), &["coeffs", "--N", "minus-one"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shoot_writes_profile_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = implode(dir.path(), &["shoot", "--n", "101"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    for col in ["Z", "V", "W", "Phi"] {
        assert!(header.split(',').any(|c| c == col), "missing column {col} in {header}");
    }
    assert!(csv.lines().count() > 1000);
    let summary: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("profile_summary.json")).unwrap()).unwrap();
    let kappa = summary.to_string();
    assert!(kappa.contains("101.4498236877"), "{kappa}");
}
