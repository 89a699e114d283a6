//! End-to-end checks of the command line binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schwarz-mortar"))
}

#[test]
fn demo_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["demo", "--preset", "two", "--tol", "1e-6"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("converged"));
    assert!(stdout.contains("relative H1 error"));
    for name in [
        "subdomain_0.mesh",
        "subdomain_0.sol",
        "subdomain_1.mesh",
        "subdomain_1.sol",
        "demo_history.csv",
        "manifest.txt",
    ] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    // mesh dump header: subdomain 0 of the two-preset is an 8x8 grid
    let mesh = std::fs::read_to_string(dir.path().join("subdomain_0.mesh")).unwrap();
    assert!(mesh.starts_with("mesh2d v1 81 128 32"), "{}", &mesh[..40]);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("command = demo"));
    assert!(manifest.contains("[domain]"));
}

#[test]
fn config_file_round_trips_through_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let config = "\
[domain]
alpha = constant 10
solver = gmres
tol = 1e-7
max_iter = 200

[subdomain]
rect = 0 0 0.5 1
cells = 3 6

[subdomain]
rect = 0.5 0 1 1
cells = 4 8

[interface]
segment = 0.5 0 0.5 1
left = 0
right = 1
";
    let cfg_path = dir.path().join("run.conf");
    std::fs::write(&cfg_path, config).unwrap();
    let out = bin()
        .arg("demo")
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("alpha = 10.000000"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("solver = gmres"));
}

#[test]
fn verify_appendix_emits_csv_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify-appendix", "--pmax", "14", "--samples", "20"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("appendix.csv")).unwrap();
    assert!(csv.starts_with("p,lambda_max,min_J_ratio,stability_C\n"));
    assert_eq!(csv.lines().count(), 14); // header + p = 2..=14
    // p = 14 is not negative definite, so a witness is written
    let witness = std::fs::read_to_string(dir.path().join("witness.txt")).unwrap();
    assert!(witness.contains("p = 14"));
}

#[test]
fn bad_preset_is_an_error() {
    let out = bin().args(["demo", "--preset", "nope"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));
}

#[test]
fn alpha_study_reports_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "alpha-study",
            "--preset",
            "two",
            "--tol",
            "1e-6",
            "--alphas",
            "8,12",
        ])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("alpha_study.csv")).unwrap();
    assert!(csv.starts_with("alpha,iters,final_residual\n"));
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("alpha_00_history.csv").exists());
    assert!(dir.path().join("alpha_01_history.csv").exists());
}
