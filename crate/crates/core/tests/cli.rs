use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn zeromode(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeromode"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("exp.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(Result::unwrap).collect()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn verify_passes_and_writes_both_formats() {
    let tmp = TempDir::new().unwrap();
    let o = zeromode(&["verify"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("verify.json").exists());
    assert!(tmp.path().join("verify.csv").exists());
    assert_eq!(json(&tmp.path().join("verify.json"))["pass"], true);
}

#[test]
fn limit_outputs_are_byte_identical_across_runs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["limit", "--sphere-points", "1024"];
    assert_eq!(zeromode(&args, a.path()).status.code(), Some(0));
    assert_eq!(zeromode(&args, b.path()).status.code(), Some(0));
    for name in ["limit.json", "limit_scan.csv", "limit_sup.csv", "limits.csv"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn scan_has_one_row_per_radius_and_direction() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[probe]\nomega_count = 5\nradii = [10.0, 20.0, 40.0, 80.0]\n",
    );
    let o = zeromode(&["limit", "--config", &cfg, "--sphere-points", "1024"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&tmp.path().join("limit_scan.csv")).len(), 4 * 5);
    assert_eq!(csv_rows(&tmp.path().join("limits.csv")).len(), 5);
    let report = json(&tmp.path().join("limit.json"));
    let slope = report["fit"]["slope"].as_f64().unwrap();
    assert!((slope + 1.0).abs() <= 0.1, "{slope}");
}

#[test]
fn zero_potential_limits_vanish() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[family]\nname = \"zero-potential\"\n");
    let o = zeromode(&["limit", "--config", &cfg, "--format", "csv"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let moduli = column(&tmp.path().join("limits.csv"), "modulus");
    assert!(!moduli.is_empty());
    assert!(moduli.iter().all(|&m| m == 0.0), "{moduli:?}");
    assert!(!tmp.path().join("limit.json").exists());
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[rule]\ntolerance = 1e-6\n");
    let o = zeromode(&["verify", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("verify.json").exists());
}

#[test]
fn slow_decay_is_a_usage_error_citing_assumption_a() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[family.decay]\nc_q = 3.0\nrho = 0.5\n");
    let o = zeromode(&["limit", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Assumption (A)"));
}

#[test]
fn budget_pairs_too_close_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "[budget]\nradii = [5.0]\nr0 = 5.0\n");
    let o = zeromode(&["budget", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreachable_tolerance_exits_with_one() {
    let tmp = TempDir::new().unwrap();
    let o = zeromode(&["limit", "--tol", "1e-30"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
    assert_eq!(json(&tmp.path().join("limit.json"))["pass"], false);
}

#[test]
fn flags_override_the_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "seed = 7\n[rule]\ntol = 1e-3\nsphere_points = 2048\n");
    let o = zeromode(
        &["verify", "--config", &cfg, "--tol", "1e-5", "--sphere-points", "512", "--seed", "9"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&tmp.path().join("verify.json"));
    assert_eq!(report["config"]["seed"], 9);
    assert_eq!(report["config"]["rule"]["tol"], 1e-5);
    assert_eq!(report["config"]["rule"]["sphere_points"], 512);
}

#[test]
fn residual_summary_fields() {
    let tmp = TempDir::new().unwrap();
    let o = zeromode(&["residual", "--sphere-points", "1024"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&tmp.path().join("residual.json"));
    assert_eq!(s["sample_count"], 23);
    assert_eq!(s["quadrature_tol"], 1e-5);
    assert_eq!(s["pass"], true);
    let max = s["max_residual"].as_f64().unwrap();
    assert!(max <= s["threshold"].as_f64().unwrap());
    let col = column(&tmp.path().join("residual.csv"), "residual");
    assert_eq!(col.len(), 23);
    assert_eq!(col.iter().cloned().fold(0.0, f64::max), max);
}
