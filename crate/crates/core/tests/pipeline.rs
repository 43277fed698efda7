use std::fs;

use rectfrac::experiments::{emit_report, Experiment, ExperimentConfig};
use rectfrac::exec;

fn config(id: &str, extra: &str) -> ExperimentConfig {
    let text = format!(
        r#"{{"id": "{id}", "seed": 5, "dimension": 2, "counts": [16, 16], "domain": [[-1, 1], [-1, 1]],
            "p": 1.3333333333333333, "q": 2, "trials": 3, "refinements": 1, "family": "gaussian_bumps" {extra}}}"#
    );
    ExperimentConfig::from_json(&text, &[]).unwrap()
}

#[test]
fn reruns_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("ortho", "");
    let first = Experiment::OrthoDecay.run(&cfg).unwrap();
    emit_report(&first, &dir.path().join("a")).unwrap();
    let second = exec::sequential(|| Experiment::OrthoDecay.run(&cfg).unwrap());
    emit_report(&second, &dir.path().join("b")).unwrap();
    for file in ["config.json", "trials.csv", "summary.json"] {
        let a = fs::read(dir.path().join("a/ortho").join(file)).unwrap();
        let b = fs::read(dir.path().join("b/ortho").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
    let csv = fs::read_to_string(dir.path().join("a/ortho/trials.csv")).unwrap();
    assert!(csv.starts_with("h1,h2,value,log2_value\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("hls", r#", "quadrature": "corrected""#);
    let r = Experiment::HlsRatio.run(&cfg).unwrap();
    emit_report(&r, dir.path()).unwrap();
    let echoed = fs::read_to_string(dir.path().join("hls/config.json")).unwrap();
    let again = ExperimentConfig::from_json(&echoed, &[]).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(Experiment::HlsRatio.run(&again).unwrap().rows, r.rows);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("hls/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["provenance"]["config_hash"], serde_json::json!(cfg.hash()));
    assert_eq!(summary["columns"][0], "trial");
}

#[test]
fn seeds_change_the_draws() {
    let a = Experiment::Carleson.run(&config("c", "")).unwrap();
    let mut cfg = config("c", "");
    cfg.seed = 6;
    let b = Experiment::Carleson.run(&cfg).unwrap();
    assert_ne!(a.rows, b.rows);
}
