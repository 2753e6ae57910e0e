use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn robin(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_robin"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env_remove("ROBIN_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn strip_runtime(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("runtime_ms");
            map.values_mut().for_each(strip_runtime);
        }
        Value::Array(xs) => xs.iter_mut().for_each(strip_runtime),
        _ => {}
    }
}

#[test]
fn flat_ball_first_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let out = robin(dir.path(), &["eigen", "--family", "real", "--dim", "3", "--kappa", "0", "--radius", "1", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("eigen.json"));
    let lambda1 = v["lambda1"].as_f64().unwrap();
    let exact = std::f64::consts::PI.powi(2) / 4.0;
    assert!((lambda1 - exact).abs() < 1e-4, "lambda1 = {lambda1}");
    assert_eq!(v["schema"], 1);
}

#[test]
fn negative_alpha_is_rejected_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = robin(dir.path(), &["eigen", "--alpha", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("eigen.json").exists());
}

#[test]
fn negative_alpha_allowed_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let out = robin(dir.path(), &["eigen", "--alpha", "-1", "--allow-negative-alpha"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let v = read_json(&dir.path().join("eigen.json"));
    assert!(v["lambda1"].as_f64().unwrap() < 0.0);
}

#[test]
fn sphere_preset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = robin(dir.path(), &["compare", "--preset", "sphere-vs-flat", "--grid", "1025"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("compare-sphere-vs-flat.json"));
    assert!(!v["reports"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = robin(dir.path(), &["compare", "--preset", "no-such-preset"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unmet_hypothesis_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    // Ricci lower bound 0.5 claimed against a model with curvature 1.
    let out = robin(
        dir.path(),
        &["compare", "--lhs-kappa", "0.5", "--kappa", "1", "--hypothesis", "ricci-lower", "--grid", "1025"],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis"));
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["compare", "--preset", "hyperbolic-vs-flat", "--grid", "1025"];
    assert_eq!(robin(a.path(), &args).status.code(), Some(0));
    assert_eq!(robin(b.path(), &args).status.code(), Some(0));
    let mut va = read_json(&a.path().join("compare-hyperbolic-vs-flat.json"));
    let mut vb = read_json(&b.path().join("compare-hyperbolic-vs-flat.json"));
    strip_runtime(&mut va);
    strip_runtime(&mut vb);
    assert_eq!(va, vb);
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "dim = 3\nradius = [oops\n").unwrap();
    let out = robin(dir.path(), &["eigen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "dim = 2\nalpha = \"dirichlet\"\nradius = 2.0\n").unwrap();
    let out = robin(dir.path(), &["eigen", "--config", cfg.to_str().unwrap(), "--radius", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(&dir.path().join("eigen.json"));
    // First Dirichlet eigenvalue of the unit disc is j_{0,1}².
    let j01: f64 = 2.404_825_557_695_773;
    assert!((v["lambda1"].as_f64().unwrap() - j01 * j01).abs() < 1e-4);
}

#[test]
fn csv_output_has_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = robin(dir.path(), &["eigen", "--format", "csv", "--modes", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("eigen.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,lambda"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_robin"))
        .args(["eigen", "--modes", "3"])
        .env("ROBIN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("eigen.json").exists());
}
