use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn sparsecov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsecov")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn rows(path: &str) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn write_rows(path: &Path, rows: &[Vec<f64>]) {
    let text: String = rows
        .iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    fs::write(path, text).unwrap();
}

fn gram(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = x[0].len();
    let n = x.len() as f64;
    (0..d).map(|i| (0..d).map(|j| x.iter().map(|r| r[i] * r[j]).sum::<f64>() / n).collect()).collect()
}

#[test]
fn identical_samples_accept_with_zero_statistic() {
    let x = fixture("null_x.csv");
    let out = sparsecov(&["two-sample", "--x", &x, "--y", &x, "--s", "2", "--boot", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["payload"]["statistic"]["value"].as_f64().unwrap(), 0.0);
    assert_eq!(v["payload"]["reject"], false);
}

#[test]
fn inflated_variance_rejects_with_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let mut y = rows(&fixture("null_y.csv"));
    for r in &mut y {
        r[2] *= 3.0;
    }
    let y_path = tmp.path().join("y.csv");
    write_rows(&y_path, &y);
    let out = sparsecov(&["two-sample", "--x", &fixture("null_x.csv"), "--y", y_path.to_str().unwrap(), "--s", "2", "--boot", "200"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["payload"]["reject"], true);
    // 1-based in the artifact
    assert!(v["payload"]["support"].as_array().unwrap().contains(&Value::from(3)));
}

#[test]
fn usage_errors_exit_1() {
    let x = fixture("null_x.csv");
    let out = sparsecov(&["two-sample", "--x", &x, "--y", &x, "--s", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 1"));
    assert_eq!(sparsecov(&["two-sample", "--x", &x]).status.code(), Some(1));
    assert_eq!(sparsecov(&["--alpha", "2"]).status.code(), Some(1));
    assert_eq!(sparsecov(&["--help"]).status.code(), Some(0));
}

#[test]
fn dimension_mismatch_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let narrow: Vec<Vec<f64>> = rows(&fixture("null_y.csv")).into_iter().map(|r| r[..5].to_vec()).collect();
    let y = tmp.path().join("narrow.csv");
    write_rows(&y, &narrow);
    let out = sparsecov(&["two-sample", "--x", &fixture("null_x.csv"), "--y", y.to_str().unwrap(), "--s", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("dimension mismatch: --x has d = 8 but --y has d = 5"), "{err}");
}

#[test]
fn one_sample_at_the_sample_covariance_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let x = fixture("null_x.csv");
    let sigma = tmp.path().join("sigma.csv");
    write_rows(&sigma, &gram(&rows(&x)));
    let out = sparsecov(&["one-sample", "--x", &x, "--sigma", sigma.to_str().unwrap(), "--s", "3", "--boot", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let stat = json(&out)["payload"]["statistic"]["value"].as_f64().unwrap();
    assert!(stat.abs() < 1e-10, "{stat}");
}

#[test]
fn plain_and_normalized_agree_at_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let eye: Vec<Vec<f64>> = (0..8).map(|i| (0..8).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let sigma = tmp.path().join("eye.csv");
    write_rows(&sigma, &eye);
    let x = fixture("null_x.csv");
    let base = ["--seed", "3", "one-sample", "--x", &x, "--sigma", sigma.to_str().unwrap(), "--s", "2", "--boot", "100"];
    let normalized = json(&sparsecov(&base));
    let plain = json(&sparsecov(&[&base[..], &["--plain"]].concat()));
    let value = |v: &Value| v["payload"]["statistic"]["value"].as_f64().unwrap();
    let q = |v: &Value| v["payload"]["q_alpha"].as_f64().unwrap();
    assert!((value(&normalized) - value(&plain)).abs() <= 1e-12 * value(&plain));
    assert!((q(&normalized) - q(&plain)).abs() <= 1e-12 * q(&plain));
}

#[test]
fn spherical_csv_has_both_intervals() {
    let out = sparsecov(&["--format", "csv", "one-sample", "--x", &fixture("null_x.csv"), "--spherical", "1", "--boot", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("which,value\n"));
    assert!(text.lines().count() > 2);
}

#[test]
fn published_design_grid_has_every_cell() {
    let out = sparsecov(&["--format", "csv", "simulate", "--table", "3", "--scale", "desk", "--mc", "1", "--boot", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    // header + 2 sizes × 4 alternatives × (3 sparsity levels + baseline)
    assert_eq!(text.lines().count(), 1 + 2 * 4 * 4);
    for method in ["sparse_s3", "sparse_s5", "sparse_s10", "linf"] {
        assert_eq!(text.lines().filter(|l| l.contains(method)).count(), 8, "{method}");
    }
}

#[test]
fn simulate_out_dir_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = tmp.path().join("grid.json");
    fs::write(
        &grid,
        r#"{"model": {"kind": "isotropic", "d": 6}, "sizes": [30, 50], "alternatives": [{"kind": "null"}, {"kind": "alt2", "c2": 0.5}],
            "methods": [{"test": "sparse", "s": 2, "solver": "brute_force"}, {"test": "linf"}], "mc_reps": 5, "boot_reps": 20}"#,
    )
    .unwrap();
    let dir = tmp.path().join("out");
    let out = sparsecov(&["--out", dir.to_str().unwrap(), "simulate", "--custom", grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let grid_csv = fs::read_to_string(dir.join("grid.csv")).unwrap();
    assert_eq!(grid_csv.lines().count(), 1 + 2 * 2 * 2);
    let replicates: Vec<_> = fs::read_dir(dir.join("replicates")).unwrap().collect();
    assert_eq!(replicates.len(), 8);
    let one = fs::read_to_string(dir.join("replicates/isotropic_d6_n30_null_linf.csv")).unwrap();
    assert_eq!(one.lines().count(), 1 + 5);
    let artifact: Value = serde_json::from_str(&fs::read_to_string(dir.join("simulate.json")).unwrap()).unwrap();
    assert_eq!(artifact["payload"].as_array().unwrap().len(), 8);
}

#[test]
fn unknown_custom_grid_field_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = tmp.path().join("grid.json");
    fs::write(
        &grid,
        r#"{"model": {"kind": "isotropic", "d": 6}, "sizes": [30], "alternatives": [{"kind": "null"}], "methods": [{"test": "linf"}], "mc": 5}"#,
    )
    .unwrap();
    let out = sparsecov(&["simulate", "--custom", grid.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_changes_bootstrap_but_not_statistic() {
    let (x, y) = (fixture("null_x.csv"), fixture("null_y.csv"));
    let run = |seed: &str| json(&sparsecov(&["--seed", seed, "two-sample", "--x", &x, "--y", &y, "--s", "2", "--boot", "100"]));
    let (a, b) = (run("1"), run("2"));
    assert_eq!(a["payload"]["statistic"], b["payload"]["statistic"]);
    assert_ne!(a["payload"]["distribution"], b["payload"]["distribution"]);
    assert_ne!(a["provenance"]["config_hash"], b["provenance"]["config_hash"]);
    assert_eq!(a["provenance"]["seed"], 1);
}

#[test]
fn verify_netsize_passes() {
    let out = sparsecov(&["--format", "csv", "verify", "--suite", "netsize"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.split(',').nth(1) == Some("1")));
}
