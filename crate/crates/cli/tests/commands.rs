use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bktc_core::{closed_form_call, ModelParams};
use tempfile::TempDir;

fn bktc(args: &[&str], config: &str, dir: &Path) -> Output {
    let path = dir.join("scenario.json");
    fs::write(&path, config).unwrap();
    let out = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_bktc"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .env("BKTC_MAX_WORKERS", "2")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_reports_three_passing_checks() {
    let tmp = TempDir::new().unwrap();
    let o = bktc(&["validate"], "{}", tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for name in ["condition1", "condition2", "condition4"] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.contains("PASS"), "{line}");
    }
    assert!(text.contains("0.02578043914194"), "{text}");
}

#[test]
fn risk_free_price_matches_closed_form() {
    let tmp = TempDir::new().unwrap();
    let o = bktc(&["price"], r#"{"variant": "RiskFree"}"#, tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut words = text.split_whitespace();
    assert_eq!(words.next(), Some("price"));
    let price: f64 = words.next().unwrap().parse().unwrap();
    let spot: f64 = text
        .split("S = ")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let p = ModelParams::default();
    let oracle = closed_form_call(spot, 8.0, p.r, p.carry(), p.sigma, 1.0);
    assert!((price - oracle).abs() < 1e-2, "{price} vs {oracle}");

    let surface = fs::read_to_string(tmp.path().join("out/surface.csv")).unwrap();
    let mut rows = surface.lines();
    assert!(rows.next().unwrap().starts_with("x,"));
    assert!(rows.next().unwrap().starts_with("S,"));
    assert_eq!(rows.count(), 262);
}

#[test]
fn ill_posed_volatility_names_condition1() {
    let tmp = TempDir::new().unwrap();
    let o = bktc(
        &["price"],
        r#"{"model": {"sigma": 0.01, "C_S": 0.002}}"#,
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(4));
    let err = stderr(&o);
    assert!(
        err.contains("WellPosednessViolation") && err.contains("condition1"),
        "{err}"
    );
    assert!(!tmp.path().join("out/surface.csv").exists());
}

#[test]
fn validate_fails_on_condition1() {
    let tmp = TempDir::new().unwrap();
    let o = bktc(&["validate"], r#"{"model": {"sigma": 0.02}}"#, tmp.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("condition1") && l.contains("FAIL")));
}

#[test]
fn config_errors_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let o = bktc(&["price"], r#"{"model": {"sigmaa": 0.2}}"#, tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ConfigError") && stderr(&o).contains("sigmaa"));

    let o = bktc(&["price"], r#"{"grid": {"n_space": 1}}"#, tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("n_space"), "{}", stderr(&o));

    let o = bktc(&["sweep"], "{}", tmp.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("`sweep`"), "{}", stderr(&o));
}

#[test]
fn unstable_forced_run_reports_the_node() {
    let tmp = TempDir::new().unwrap();
    let o = bktc(
        &["price"],
        r#"{"grid": {"horizon_T": 50, "n_time": 200}, "substepping": "off"}"#,
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(stderr(&o).contains("NonFiniteValue") && stderr(&o).contains("node"));
}

#[test]
fn sweep_output_is_byte_identical_across_runs() {
    let config = r#"{"grid": {"n_space": 80, "n_time": 100},
                     "sweep": {"parameter": "sigma", "values": [0.08, 0.1, 0.15, 0.2]}}"#;
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert!(bktc(&["sweep"], config, a.path()).status.success());
    assert!(bktc(&["sweep"], config, b.path()).status.success());
    let first = fs::read(a.path().join("out/sweep.csv")).unwrap();
    assert_eq!(first, fs::read(b.path().join("out/sweep.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().next(), Some("parameter,value,S,price,cva"));
    assert_eq!(text.lines().count(), 1 + 4 * 81);
}

#[test]
fn resolved_config_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let o = bktc(
        &["cva"],
        r#"{"variant": "BK", "grid": {"n_space": 60, "n_time": 120}}"#,
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let resolved = fs::read_to_string(tmp.path().join("out/resolved_config.json")).unwrap();
    for key in [
        "\"alpha\"",
        "\"x_minus\"",
        "\"boundary_mode\"",
        "\"vega_bump\"",
        "\"condition2_constant\"",
        "\"lambda_B\"",
    ] {
        assert!(resolved.contains(key), "{key} missing from {resolved}");
    }
    let first = fs::read(tmp.path().join("out/cva.csv")).unwrap();

    let again = TempDir::new().unwrap();
    let o = bktc(&["cva"], &resolved, again.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(first, fs::read(again.path().join("out/cva.csv")).unwrap());
    let echoed = fs::read_to_string(again.path().join("out/resolved_config.json")).unwrap();
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("output_dir"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&echoed), strip(&resolved));
}

#[test]
fn greeks_writes_one_row_per_node() {
    let tmp = TempDir::new().unwrap();
    let o = bktc(
        &["greeks"],
        r#"{"grid": {"n_space": 60, "n_time": 120}}"#,
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("out/greeks.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("S,delta,gamma,vega,rho"));
    assert_eq!(text.lines().count(), 62);
    assert!(stdout(&o).contains("delta"));
}

#[test]
fn bad_worker_cap_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("s.json");
    fs::write(&path, "{}").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bktc"))
        .args(["validate", "--config"])
        .arg(&path)
        .env("BKTC_MAX_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("BKTC_MAX_WORKERS"));
}
