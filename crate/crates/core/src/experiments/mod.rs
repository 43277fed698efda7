//! Seeded end-to-end experiments.
//!
//! Each runner takes an [`ExperimentConfig`], draws its test functions from
//! the seeded families, and returns an [`ExperimentResult`] whose scalars
//! depend only on the config. [`emit_report`] writes the result to disk.

mod config;
mod covariance;
mod decay;
mod families;
mod necessity;
mod result;
mod sweeps;

pub use config::{apply_override, parse_override, ExperimentConfig, WeightSpec};
pub use covariance::run_covariance_suite;
pub use decay::run_ortho_decay;
pub use families::{draw_nonzero, stream_rng, FunctionDraw, FunctionFamily};
pub use necessity::run_dilation_necessity;
pub use result::{emit_report, fmt_f64, ExperimentResult, Provenance, CODE_VERSION};
pub use sweeps::{build_levels, run_carleson, run_doubling, run_hedberg, run_hls_ratio, run_maximal_regularity, Level};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Doubling,
    HlsRatio,
    DilationNecessity,
    MaximalRegularity,
    Carleson,
    OrthoDecay,
    Covariance,
    Hedberg,
}

impl Experiment {
    pub fn run(self, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
        match self {
            Experiment::Doubling => run_doubling(cfg),
            Experiment::HlsRatio => run_hls_ratio(cfg),
            Experiment::DilationNecessity => run_dilation_necessity(cfg),
            Experiment::MaximalRegularity => run_maximal_regularity(cfg),
            Experiment::Carleson => run_carleson(cfg),
            Experiment::OrthoDecay => run_ortho_decay(cfg),
            Experiment::Covariance => run_covariance_suite(cfg),
            Experiment::Hedberg => run_hedberg(cfg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{"id": "x", "dimension": 2, "counts": [8, 8], "domain": [[-1, 1], [-1, 1]], "p": 2, "q": 4,
                "trials": 2, "refinements": 1 {extra}}}"#
        );
        ExperimentConfig::from_json(&text, &[]).unwrap()
    }

    #[test]
    fn hls_runs_are_deterministic() {
        let c = cfg("");
        let a = run_hls_ratio(&c).unwrap();
        let b = run_hls_ratio(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 4);
        assert!(a.get_f64("homogeneity_rel_error").unwrap() <= 1e-12);
        let seq = crate::exec::sequential(|| run_hls_ratio(&c).unwrap());
        assert_eq!(a.rows, seq.rows);
    }

    #[test]
    fn necessity_slope_matches_scaling() {
        let c = cfg(r#", "family": "gaussian_bumps", "k_max": 3"#);
        let r = run_dilation_necessity(&c).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.get_f64("max_slope_deviation").unwrap() < 1e-9);
        let bad = cfg(r#", "weight": {"kind": "product_exponential"}"#);
        assert!(run_dilation_necessity(&bad).is_err());
    }

    #[test]
    fn covariance_identities_are_exact() {
        for w in [r#", "weight": {"kind": "lebesgue"}"#, r#", "weight": {"kind": "product_power", "exponents": [1, 0.5]}"#] {
            let r = run_covariance_suite(&cfg(w)).unwrap();
            assert!(r.passed(), "{:?}", r.violations);
            assert_eq!(r.rows.len(), 9);
        }
        let incompatible = cfg(r#", "dilations": [[4, 0]]"#);
        assert!(run_covariance_suite(&incompatible).is_err());
    }

    #[test]
    fn ortho_q2_is_consistent() {
        let c = cfg(r#", "p": 1.3333333333333333, "q": 2, "h_max": 2"#);
        let r = run_ortho_decay(&c).unwrap();
        assert!(r.get_f64("q2_rel_error").unwrap() < 1e-8);
        assert_eq!(r.columns, ["h1", "h2", "value", "log2_value"]);
        assert_eq!(r.get_f64("b_beyond_range"), Some(0.0));
        assert!(run_ortho_decay(&cfg(r#", "q": 5"#)).is_err());
    }

    #[test]
    fn sweeps_report_ratios() {
        for exp in [Experiment::MaximalRegularity, Experiment::Carleson, Experiment::Hedberg] {
            let r = exp.run(&cfg(r#", "growth_cap": 10"#)).unwrap();
            assert!(r.passed(), "{exp:?}: {:?}", r.violations);
            assert_eq!(r.summary["max_ratio"].as_array().unwrap().len(), 2);
        }
        let d = run_doubling(&cfg("")).unwrap();
        assert_eq!(d.summary["all_doubling"], serde_json::json!(true));
    }
}
