use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn steklov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn make_domain_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("half.json");
    let out = steklov(&["make-domain", "--family", "half_disk", "--condition", "dirichlet", "--out", path(&file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = steklov(&["solve", "--domain", path(&file), "--kind", "sd", "--k", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let spectrum: Vec<f64> = serde_json::from_value(v["spectrum"].clone()).unwrap();
    for (j, s) in spectrum.iter().enumerate() {
        assert!((s - (j + 1) as f64).abs() < 1e-6, "{spectrum:?}");
    }
    assert!(v["diagnostics"]["condition"].as_f64().unwrap() > 1.0);
}

#[test]
fn solve_csv_is_reproducible() {
    let args = ["--seed", "7", "solve", "--domain", "smooth_blob", "--k", "5", "--out", "csv"];
    let (a, b) = (steklov(&args), steklov(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("index,value"));
}

#[test]
fn check_reports_margin_and_exit_codes() {
    let out = steklov(&["check", "--bound", "hps", "--k", "2", "--domain", "gp_chain(2,0.1)"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["satisfied"], Value::Bool(true));
    assert!(v["margin"].as_f64().unwrap() > 0.0);
    // a full Steklov disk has no mixed decomposition
    let out = steklov(&["check", "--bound", "thmA_sharp", "--domain", "disk"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not applicable"));
}

#[test]
fn split_check_on_a_symmetric_blob() {
    let out = steklov(&["--seed", "3", "make-domain", "--family", "smooth_blob", "--symmetry", "reflect"]);
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("blob.json");
    std::fs::write(&file, &out.stdout).unwrap();
    let out = steklov(&["split-check", "--domain", path(&file), "--axis", "0,0,1,0", "--k", "8", "--estimate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&out)["max_mismatch"].as_f64().unwrap() < 1e-6);
}

#[test]
fn recover_from_model_spectrum() {
    let out = steklov(&["model-spectrum", "--ls", "6.283185307179586", "--ln", "3.141592653589793", "--k", "200"]);
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("tail.json");
    std::fs::write(&file, &out.stdout).unwrap();
    let out = steklov(&["recover", "--spectrum", path(&file), "--kind", "sn"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["n"], 1);
    assert_eq!(v["m"], 1);
}

#[test]
fn asymptotics_csv() {
    let out = steklov(&["asymptotics", "--domain", "disk", "--kmin", "1", "--kmax", "10", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("k,computed,model,residual,error_estimate"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn sweep_from_arguments() {
    let out = steklov(&["sweep", "--family", "disk", "--schedule", "0.5,2", "--bound", "weinstock", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn config_file_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("solver.conf");
    std::fs::write(&conf, "nodes_per_unit_length = 20\n").unwrap();
    let out = steklov(&["--config", path(&conf), "solve", "--domain", "disk", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    // half the default density
    assert_eq!(json(&out)["diagnostics"]["nodes"].as_u64(), Some(126));
    std::fs::write(&conf, "bogus = 1\n").unwrap();
    let out = steklov(&["--config", path(&conf), "solve", "--domain", "disk"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(steklov(&["solve", "--kind", "sn"]).status.code(), Some(64));
    assert_eq!(steklov(&["--help"]).status.code(), Some(0));
}
