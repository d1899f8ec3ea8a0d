use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const ANNULUS: &str = "[geometry]\nkind = \"annulus\"\nr1 = 1.0\nr2 = 2.0\n[grid]\nresolution = 65\n";

fn setup(body: &str) -> (TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, body).unwrap();
    let out = dir.path().join("out");
    (dir, cfg, out)
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = Command::new(env!("CARGO_BIN_EXE_hopf-lab"))
        .args([cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap()
        .status;
    status.code().unwrap()
}

fn power(p: f64) -> String {
    format!("[function]\nkind = \"power\"\np = {p:?}\n{ANNULUS}")
}

#[test]
fn check_power_law_passes() {
    let (_d, cfg, out) = setup(&format!("{}[modulus]\nkind = \"power\"\na = 0.5\n", power(2.0)));
    assert_eq!(run("check", &cfg, &out, &[]), 0);
    assert!(out.join("conditions.json").is_file());
    assert!(fs::read_to_string(out.join("dini.json")).unwrap().contains("converges"));
}

#[test]
fn check_minimal_surface_fails_coercivity() {
    let (_d, cfg, out) = setup(&format!("[function]\nkind = \"minimal_surface\"\n{ANNULUS}"));
    assert_eq!(run("check", &cfg, &out, &[]), 2);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("conditions.json")).unwrap()).unwrap();
    let text = report.to_string();
    assert!(text.contains("Coercivity"), "{text}");
}

#[test]
fn missing_table_is_a_config_error() {
    let (_d, cfg, out) = setup(&format!("[function]\nkind = \"table\"\ntable = \"absent.csv\"\n{ANNULUS}"));
    assert_eq!(run("check", &cfg, &out, &[]), 1);
}

#[test]
fn forced_nonconvergence_writes_last_iterate() {
    let (_d, cfg, out) = setup(&format!("{}[solver]\nmax_iter = 1\n", power(3.0)));
    assert_eq!(run("solve", &cfg, &out, &[]), 3);
    assert!(out.join("potential.grid").is_file());
    assert!(out.join("convergence.csv").is_file());
}

#[test]
fn singular_power_solves() {
    let (_d, cfg, out) = setup(&power(1.5));
    assert_eq!(run("solve", &cfg, &out, &[]), 0);
    assert!(fs::read_to_string(out.join("potential.grid")).unwrap().starts_with("HOPFGRID 1\n"));
}

#[test]
fn verify_before_solve_is_missing_artifact() {
    let (_d, cfg, out) = setup(&power(2.0));
    assert_eq!(run("verify", &cfg, &out, &[]), 1);
}

#[test]
fn non_dini_modulus_is_recorded() {
    let (_d, cfg, out) = setup(&format!("{}[modulus]\nkind = \"log_power\"\nq = 1.0\n[verify]\nzeta = \"modulus\"\n", power(2.0)));
    assert_eq!(run("solve", &cfg, &out, &[]), 0);
    assert_eq!(run("verify", &cfg, &out, &[]), 2);
    let barrier = fs::read_to_string(out.join("barrier.json")).unwrap();
    assert!(barrier.contains("NotIntegrable"), "{barrier}");
}

#[test]
fn flags_override_the_config() {
    let (_d, cfg, out) = setup(&power(2.0));
    assert_eq!(run("solve", &cfg, &out, &["--grid", "41", "--p", "3.0"]), 0);
    let grid = fs::read_to_string(out.join("potential.grid")).unwrap();
    assert!(grid.contains("\nnx 41\n"));
    let solve = fs::read_to_string(out.join("solve.json")).unwrap();
    assert!(solve.contains("3.0"), "{solve}");
}

#[test]
fn usage_errors_exit_one() {
    let bin = env!("CARGO_BIN_EXE_hopf-lab");
    assert_eq!(Command::new(bin).arg("frobnicate").output().unwrap().status.code(), Some(1));
    assert_eq!(Command::new(bin).args(["check", "--config", "/nonexistent/run.toml"]).output().unwrap().status.code(), Some(1));
    assert_eq!(Command::new(bin).arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn rerunning_a_stage_is_idempotent() {
    let (_d, cfg, out) = setup(&power(2.0));
    assert_eq!(run("solve", &cfg, &out, &[]), 0);
    let first = fs::read(out.join("potential.grid")).unwrap();
    let log = fs::read(out.join("convergence.csv")).unwrap();
    assert_eq!(run("solve", &cfg, &out, &[]), 0);
    assert_eq!(fs::read(out.join("potential.grid")).unwrap(), first);
    assert_eq!(fs::read(out.join("convergence.csv")).unwrap(), log);
}
