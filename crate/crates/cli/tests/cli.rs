use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn relfix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relfix")).args(args).output().unwrap()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn ex2_4_passes_and_reports_three_quarters() {
    let tmp = tempfile::tempdir().unwrap();
    let out = relfix(&["verify-example", "ex2.4", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(tmp.path());
    assert_eq!(r["results"]["lambda_hat"], 0.75);
    assert!(r["results"]["fixed_point"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(r["all_passed"], true);
    let csv = fs::read_to_string(tmp.path().join("orbit.csv")).unwrap();
    assert!(csv.starts_with("n,point,d_gap,p_gap,bound\n0,2,"));
}

#[test]
fn ex2_3_passes_with_advisories() {
    let tmp = tempfile::tempdir().unwrap();
    let out = relfix(&["verify-example", "Ex2_3", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(tmp.path());
    let advisories = r["advisories"].as_array().unwrap();
    assert!(advisories.iter().any(|a| a.as_str().unwrap().contains("diagonal")));
    assert!(advisories.iter().any(|a| a.as_str().unwrap().contains("toward 1")));
}

#[test]
fn every_example_passes() {
    for id in ["ex1.7", "ex1.13", "ex1.14"] {
        let tmp = tempfile::tempdir().unwrap();
        let out = relfix(&["verify-example", id, "--out", tmp.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{id}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn constant_source_converges_in_two_iterations() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("constant.toml");
    let out = relfix(&["solve-fbvp", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(report(tmp.path())["results"]["iterations"], 2);
    let csv = fs::read_to_string(tmp.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("t,x\n0,0\n"));
    assert_eq!(csv.lines().count(), 258);
}

#[test]
fn green_variant_meets_its_boundary_condition() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("sin_squared_green.toml");
    let out = relfix(&["solve-fbvp", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(report(tmp.path())["results"]["boundary_residual"].as_f64().unwrap() < 1e-5);
}

#[test]
fn failed_hypothesis_exits_one_and_warns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config("strong_growth.toml");
    let out = relfix(&["solve-fbvp", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not guaranteed"));
    let r = report(tmp.path());
    assert_eq!(r["all_passed"], false);
    assert_eq!(r["results"]["status"], "ContractionWarning");

    let replay = relfix(&["report", "--in", tmp.path().to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&replay.stdout).contains("[FAIL] contraction_hypothesis"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(relfix(&["verify-example", "ex9.9"]).status.code(), Some(2));
    assert_eq!(relfix(&["verify-example", "ex2.4", "--step", "-1"]).status.code(), Some(2));
    assert_eq!(relfix(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(relfix(&["report", "--in", "/nonexistent/relfix"]).status.code(), Some(2));

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "beta = 3.0\nk = 0.5\nlipschitz = 0\nsource = \"constant\"\nparams = [1]\n").unwrap();
    let out = relfix(&["solve-fbvp", "--config", bad.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
    fs::write(&bad, "beta = 1.5\nk = 0.5\nsource = \"constant\"\n").unwrap();
    let out = relfix(&["solve-fbvp", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lipschitz"));
}

#[test]
fn seed_changes_only_the_seeded_orbits() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    relfix(&["verify-example", "ex2.4", "--seed", "1", "--out", a.path().to_str().unwrap()]);
    relfix(&["verify-example", "ex2.4", "--seed", "2", "--out", b.path().to_str().unwrap()]);
    let (ra, rb) = (report(a.path()), report(b.path()));
    assert_ne!(ra["results"]["seeded_orbit_starts"], rb["results"]["seeded_orbit_starts"]);
    assert_eq!(ra["results"]["lambda_hat"], rb["results"]["lambda_hat"]);
}
