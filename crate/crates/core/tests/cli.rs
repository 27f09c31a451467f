use std::process::{Command, Output};

use serde_json::Value;

fn sphtx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sphtx")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_kind(o: &Output) -> String {
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(v["message"].is_string());
    v["error"].as_str().unwrap().to_string()
}

#[test]
fn multipliers_table_at_minus_one() {
    let o = sphtx(&["multipliers", "--n", "3", "--J", "8", "--lambda", "-1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# sphere-transforms "));
    assert_eq!(lines.next().unwrap(), "operator,n,j,lambda_re,lambda_im,ell,value_re,value_im");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..3], ["cosine", "3", "0"]);
    let v: f64 = row[6].parse().unwrap();
    assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    assert!(!text.contains('\r'));
}

#[test]
fn log_tables_skip_the_mean() {
    let text = stdout(&sphtx(&["multipliers", "--operator", "log-cosine", "--n", "3", "--J", "4"]));
    assert!(!text.contains("log-cosine,3,0,"));
    assert!(text.contains("log-cosine,3,2,"));
}

#[test]
fn errors_are_json_on_stderr_with_exit_one() {
    let o = sphtx(&["invert", "--theorem", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "parse-error");
    assert!(o.stdout.is_empty());

    let o = sphtx(&["stiefel-check", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "insufficient-samples");

    let o = sphtx(&["multipliers", "--lambda", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "pole-error");

    let o = sphtx(&["convergence", "--values", "1e-2,1e-3"]);
    assert_eq!(error_kind(&o), "invalid-argument");

    let o = sphtx(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(error_kind(&o), "invalid-argument");
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(sphtx(&["--help"]).status.code(), Some(0));
    let o = sphtx(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn tolerance_miss_exits_two() {
    let o = sphtx(&["diffop", "--path", "fd", "--tolerance", "1e-12"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("passed=false"));
    assert_eq!(sphtx(&["diffop", "--path", "fd"]).status.code(), Some(0));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 5\nJ = 4\nlambda = 0.5\noperator = \"sine\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = stdout(&sphtx(&["multipliers", "--config", cfg]));
    assert!(from_file.lines().any(|l| l.starts_with("sine,5,4,5.0000000000000000e-1,")));
    let overridden = stdout(&sphtx(&["--config", cfg, "multipliers", "--n", "4"]));
    assert!(overridden.lines().any(|l| l.starts_with("sine,4,4,")));
    assert_ne!(from_file.lines().next(), overridden.lines().next(), "config hash must change");

    std::fs::write(dir.path().join("bad.toml"), "colour = 3\n").unwrap();
    let o = sphtx(&["multipliers", "--config", dir.path().join("bad.toml").to_str().unwrap()]);
    assert_eq!(error_kind(&o), "parse-error");
}

#[test]
fn invert_writes_report_and_node_csv() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let o = sphtx(&[
        "invert", "--theorem", "general-between", "--n", "3", "--lambda", "-1.5", "--ell", "2", "--seed", "4",
        "--output", json.to_str().unwrap(), "--csv", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["method"], "between");
    assert_eq!(report["passed"], true);
    assert!(report["max_error"].as_f64().unwrap() < 1e-8);
    let hash = report["config_hash"].as_str().unwrap();
    let nodes = std::fs::read_to_string(&csv).unwrap();
    assert!(nodes.lines().next().unwrap().ends_with(&format!("config={hash}")));
    assert!(nodes.lines().nth(2).unwrap().starts_with("x1,x2,x3,input_re"));
}

#[test]
fn forward_transform_csv() {
    let o = sphtx(&["forward", "--transform", "funk", "--n", "4", "--input", "zonal:j=2,pole=0,0,0.6,0.8", "--resolution", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let header = text.lines().nth(2).unwrap();
    assert_eq!(header, "x1,x2,x3,x4,input_re,input_im,output_re,output_im");
    // F Z_2 = f_2 Z_2 with f_2 = -1/3 on S^3.
    for line in text.lines().skip(3) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[6] + v[4] / 3.0).abs() < 1e-10, "{line}");
    }
}

#[test]
fn stiefel_check_report() {
    let o = sphtx(&["stiefel-check", "--identity", "thm4.1-i", "--n", "4", "--k", "1", "--samples", "20000", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["identity", "params", "spectral_error", "mc_error", "mc_sigma", "version", "config_hash"] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert_eq!(v["identity"], "thm4.1-i");
    assert!(v["spectral_error"].as_f64().unwrap() < 1e-10);
}

#[test]
fn mc_convergence_slope() {
    let o = sphtx(&["convergence", "--study", "mc-dual-funk", "--n", "4", "--k", "1", "--replicates", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("passed=true"));
}
