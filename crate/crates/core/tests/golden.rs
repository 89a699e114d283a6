//! Golden-file tests pinning the CSV schemas and the exact emitted bytes
//! of small study runs.

use schwarz_mortar::study::{preset, run_alpha_study, run_convergence_study, run_demo};

fn golden(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("missing golden {name}: {e}"))
}

#[test]
fn convergence_csv_matches_golden() {
    let mut cfg = preset("conforming").unwrap();
    cfg.refinements = 1;
    let dir = tempfile::tempdir().unwrap();
    run_convergence_study(&cfg, Some(dir.path())).unwrap();
    let got = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert_eq!(got, golden("convergence.csv"));
    let got = std::fs::read_to_string(dir.path().join("convergence_subdomains.csv")).unwrap();
    assert_eq!(got, golden("convergence_subdomains.csv"));
}

#[test]
fn alpha_study_csvs_match_golden() {
    let mut cfg = preset("two").unwrap();
    cfg.tol = 1e-8;
    let dir = tempfile::tempdir().unwrap();
    run_alpha_study(&cfg, &[10.0, 20.0], Some(dir.path())).unwrap();
    for name in ["alpha_study.csv", "alpha_00_history.csv", "alpha_01_history.csv"] {
        let got = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(got, golden(name), "{name}");
    }
}

#[test]
fn demo_history_matches_golden() {
    let mut cfg = preset("two").unwrap();
    cfg.tol = 1e-8;
    let dir = tempfile::tempdir().unwrap();
    run_demo(&cfg, Some(dir.path())).unwrap();
    let got = std::fs::read_to_string(dir.path().join("demo_history.csv")).unwrap();
    assert_eq!(got, golden("demo_history.csv"));
}
