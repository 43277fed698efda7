//! Acceptance checks, one PASS/FAIL line each. Exits non-zero on failure.
//!
//! Pass substrings as arguments to run a subset, e.g. `-- hedberg`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use rectfrac::analysis::compute_theta;
use rectfrac::experiments::{stream_rng, Experiment, ExperimentConfig, ExperimentResult};
use rectfrac::geometry::{classify, cone_shell_bounds, smallest_rect_volume, ExponentSet};
use rectfrac::grid::{Grid, GridFunction, MeasureTable, Weight, WeightKind};
use rectfrac::oracle::oracle_suite;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<Outcome, String>;

fn config(name: &str, overrides: &[(&str, &str)]) -> Result<ExperimentConfig, String> {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "configs", &format!("{name}.json")].iter().collect();
    let o: Vec<(String, String)> = overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    ExperimentConfig::load(&path, &o).map_err(|e| e.to_string())
}

fn run(exp: Experiment, name: &str) -> Result<ExperimentResult, String> {
    exp.run(&config(name, &[])?).map_err(|e| format!("{name}: {e}"))
}

fn violations(r: &ExperimentResult) -> String {
    r.violations.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
}

fn sample_weights(grid: &Grid, seed: u64) -> Result<Vec<(&'static str, Weight)>, String> {
    let mut rng = stream_rng(seed, 1);
    let custom: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(0.2..5.0)).collect();
    let e = |e: rectfrac::Error| e.to_string();
    Ok(vec![
        ("lebesgue", Weight::lebesgue(grid)),
        ("power", Weight::from_kind(WeightKind::ProductPower { exponents: vec![1.0, 0.5] }, grid).map_err(e)?),
        ("exponential", Weight::from_kind(WeightKind::ProductExponential, grid).map_err(e)?),
        ("sampled", Weight::custom(grid, custom).map_err(e)?),
    ])
}

fn partition_of_unity() -> Result<Outcome, String> {
    let start = Instant::now();
    let grid = Grid::uniform(2, -1.0, 1.0, 32).map_err(|e| e.to_string())?;
    let e = ExponentSet::new(2, 2.0, 4.0).map_err(|e| e.to_string())?;
    let mut rng = stream_rng(7, 2);
    let f = GridFunction::new((0..grid.len()).map(|_| rng.random_range(0.01..1.0)).collect()).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (_, w) in sample_weights(&grid, 7)? {
        let m = MeasureTable::new(&grid, &w).map_err(|e| e.to_string())?;
        let theta = compute_theta(&f, &m, &e).map_err(|e| e.to_string())?;
        if !theta.empty_cells.is_empty() {
            return Ok(Outcome { pass: false, detail: format!("{} cells without off-axis mass", theta.empty_cells.len()) });
        }
        for x in 0..grid.len() {
            worst = worst.max((theta.sum_at(x) - 1.0).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: worst <= 1e-10 && secs < 10.0,
        detail: format!("max |sum_t theta_t - 1| = {worst:.2e} over 4 weights, 32x32, {secs:.1} s (limit 10 s)"),
    })
}

fn oracle_equivalence() -> Result<Outcome, String> {
    let start = Instant::now();
    let report = oracle_suite(2024, None).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let worst = report.checks.iter().map(|c| c.max_rel_error).fold(0.0, f64::max);
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok(Outcome {
        pass: report.passed() && secs < 60.0,
        detail: format!(
            "{} checks, worst rel error {worst:.2e}, failed {failed:?}, {secs:.1} s (limit 60 s)",
            report.checks.len()
        ),
    })
}

fn kernel_bounds() -> Result<Outcome, String> {
    let grid = Grid::uniform(2, 0.0, 1.0, 16).map_err(|e| e.to_string())?;
    let (mut pairs, mut saturated, mut bad) = (0usize, 0usize, Vec::new());
    for (name, w) in sample_weights(&grid, 3)? {
        let m = MeasureTable::new(&grid, &w).map_err(|e| e.to_string())?;
        for x in 0..grid.len() {
            let cx = grid.center(x);
            for y in 0..grid.len() {
                let cy = grid.center(y);
                let Some((t, j)) = classify(&cx, &cy) else { continue };
                pairs += 1;
                let v = smallest_rect_volume(&m, &cx, &cy);
                let (lower, upper) = cone_shell_bounds(&m, &cx, &t, j);
                if lower > v {
                    bad.push(format!("{name} ({x},{y}) lower {lower} > V {v}"));
                } else if v >= upper {
                    // on a bounded grid the enlarged rectangle can be clipped
                    // to the same cells; anywhere else this is a violation
                    let leaves = (0..2).any(|i| {
                        let r = 2f64.powi((j + 1 - t.as_slice()[i] as i64) as i32);
                        let a = grid.axis(i);
                        cx[i] - r < a.lo || cx[i] + r > a.hi
                    });
                    if leaves && v == upper {
                        saturated += 1;
                    } else {
                        bad.push(format!("{name} ({x},{y}) V {v} >= upper {upper}"));
                    }
                }
            }
        }
    }
    Ok(Outcome {
        pass: bad.is_empty(),
        detail: format!(
            "{pairs} pairs over 4 weights on 16x16, {} violations, {saturated} boundary-saturated{}",
            bad.len(),
            bad.first().map_or(String::new(), |b| format!(", first: {b}"))
        ),
    })
}

fn covariance() -> Result<Outcome, String> {
    let mut details = Vec::new();
    let mut pass = true;
    for name in ["covariance", "covariance_power"] {
        let r = run(Experiment::Covariance, name)?;
        pass &= r.passed();
        details.push(format!("{name}: max rel {:.2e} {}", r.get_f64("max_relative_error").unwrap_or(f64::NAN), violations(&r)));
    }
    Ok(Outcome { pass, detail: format!("64x64, s in {{0,1,2}}^2; {}", details.join(", ")) })
}

fn necessity() -> Result<Outcome, String> {
    let start = Instant::now();
    let r = run(Experiment::DilationNecessity, "necessity")?;
    let secs = start.elapsed().as_secs_f64();
    let slopes: Vec<String> = r.summary["slopes"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|s| format!("a'={:.1}: {:.4}", s["alpha_prime"].as_f64().unwrap(), s["slope"].as_f64().unwrap()))
                .collect()
        })
        .unwrap_or_default();
    Ok(Outcome {
        pass: r.passed() && secs < 300.0,
        detail: format!("slopes [{}] at 128x128, {secs:.1} s (limit 300 s) {}", slopes.join(", "), violations(&r)),
    })
}

fn growth_line(r: &ExperimentResult) -> String {
    format!("{} growth {}", r.id, r.summary["growth"])
}

fn boundedness() -> Result<Outcome, String> {
    let mut pass = true;
    let mut lines = Vec::new();
    for (exp, name) in [
        (Experiment::HlsRatio, "hls"),
        (Experiment::HlsRatio, "hls_power"),
        (Experiment::MaximalRegularity, "maximal"),
        (Experiment::MaximalRegularity, "maximal_power"),
        (Experiment::Carleson, "carleson"),
        (Experiment::Carleson, "carleson_power"),
    ] {
        let r = run(exp, name)?;
        pass &= r.passed();
        lines.push(growth_line(&r) + &violations(&r));
    }
    let mid = Experiment::HlsRatio
        .run(&config("hls", &[("quadrature", "midpoint")])?)
        .map_err(|e| e.to_string())?;
    println!("      diagnostic, midpoint quadrature: hls growth {} (not gated)", mid.summary["growth"]);
    Ok(Outcome { pass, detail: format!("cap 15%, 20 trials, 32->64->128: {}", lines.join("; ")) })
}

fn hedberg() -> Result<Outcome, String> {
    let r = run(Experiment::Hedberg, "hedberg")?;
    let finite = r.summary["max_ratio"].as_array().is_some_and(|a| a.iter().all(|v| v.as_f64().is_some_and(f64::is_finite)));
    let mid = Experiment::Hedberg
        .run(&config("hedberg", &[("quadrature", "midpoint"), ("trials", "5")])?)
        .map_err(|e| e.to_string())?;
    println!(
        "      diagnostic, midpoint quadrature (5 trials): max ratio {} growth {} (not gated)",
        mid.summary["max_ratio"], mid.summary["growth"]
    );
    Ok(Outcome {
        pass: r.passed() && finite,
        detail: format!("max ratio {} growth {} (cap 10%) {}", r.summary["max_ratio"], r.summary["growth"], violations(&r)),
    })
}

fn ortho() -> Result<Outcome, String> {
    let start = Instant::now();
    let r = run(Experiment::OrthoDecay, "ortho")?;
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome {
        pass: r.passed() && secs < 600.0,
        detail: format!(
            "64x64 q=4: epsilon {} R^2 {}, {secs:.1} s (limit 600 s) {}",
            r.summary["epsilon"],
            r.summary["r_squared"],
            violations(&r)
        ),
    })
}

fn q2_consistency() -> Result<Outcome, String> {
    let r = run(Experiment::OrthoDecay, "ortho_q2")?;
    let rel = r.get_f64("q2_rel_error").unwrap_or(f64::INFINITY);
    Ok(Outcome { pass: rel <= 1e-8, detail: format!("16x16: |sum_h B(h) - int (I f)^2| / int = {rel:.2e} (tol 1e-8)") })
}

fn doubling_flags() -> Result<Outcome, String> {
    let leb = run(Experiment::Doubling, "doubling_lebesgue")?;
    let exp = run(Experiment::Doubling, "doubling_exponential")?;
    let unit = |key: &str| leb.summary[key].as_array().is_some_and(|a| a.iter().all(|v| (v.as_f64().unwrap() - 1.0).abs() <= 1e-9));
    let leb_ok = unit("gamma") && unit("eta") && leb.summary["all_doubling"] == true;
    let exp_flagged = exp.summary["all_doubling"] == false;
    Ok(Outcome {
        pass: leb_ok && exp_flagged,
        detail: format!(
            "lebesgue gamma {} eta {}; exp(|x1|+|x2|) on [-8,8]^2 is_doubling {} (gamma {})",
            leb.summary["gamma"], leb.summary["eta"], exp.summary["is_doubling"], exp.summary["gamma"]
        ),
    })
}

fn main() -> ExitCode {
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, Check); 10] = [
        ("partition of unity", partition_of_unity),
        ("oracle equivalence", oracle_equivalence),
        ("two-sided kernel bound", kernel_bounds),
        ("dilation covariance", covariance),
        ("necessity slope", necessity),
        ("boundedness proxies", boundedness),
        ("hedberg audit", hedberg),
        ("almost-orthogonality decay", ortho),
        ("q-power consistency", q2_consistency),
        ("doubling flags", doubling_flags),
    ];
    let mut failed = 0;
    let mut total = Duration::ZERO;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        let elapsed = start.elapsed();
        total += elapsed;
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "{} {:>2}. {name} [{:.1} s]: {}",
            if outcome.pass { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {failed} failed, {:.1} s", total.as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
