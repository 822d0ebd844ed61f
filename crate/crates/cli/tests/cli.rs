use std::path::Path;
use std::process::{Command, Output};

fn discsde(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discsde"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("DISCSDE_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn unknown_model_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = discsde(&["convergence", "--model", "nope"], dir.path());
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("nope") && err.contains("circle"), "{err}");
}

#[test]
fn bad_levels_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for levels in ["5:3", "0:4", "a:b", "1:2"] {
        let o = discsde(&["convergence", "--model", "brownian", "--levels", levels, "--paths", "4"], dir.path());
        assert_eq!(code(&o), 2, "levels {levels}");
    }
}

#[test]
fn benchmark_refuses_threads() {
    let dir = tempfile::tempdir().unwrap();
    let o = discsde(&["benchmark", "--model", "circle", "--threads", "4"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("benchmark.csv").exists());
}

#[test]
fn check_exit_codes_follow_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let ok = discsde(&["check", "--model", "circle"], dir.path());
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stdout));
    let bad = discsde(&["check", "--model", "tangential"], dir.path());
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stdout).contains("non-parallelity"));
}

#[test]
fn occupation_with_one_eps_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("occ.cfg");
    std::fs::write(&cfg, "model = step\neps = 0.05\npaths = 8\noccupation_steps_log2 = 4\n").unwrap();
    let o = discsde(&["occupation", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "model = circle\nscheme = both\nseed = 3\nlevels = 1:4\npaths = 64\n").unwrap();
    let out = dir.path().join("res");
    let o = discsde(&["convergence", "--config", cfg.to_str().unwrap(), "--paths", "32"], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.starts_with("circle,") && r.ends_with(",32,3")));
    assert!(out.join("convergence_timing.csv").exists());
}

#[test]
fn output_directory_defaults_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_discsde"))
        .args(["check", "--model", "step"])
        .env("DISCSDE_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}
