use serde_json::json;

use super::config::ExperimentConfig;
use super::families::draw_nonzero;
use super::result::{fmt_f64, ExperimentResult};
use crate::analysis::{carleson_sum, hedberg_audit_with};
use crate::error::Result;
use crate::exec;
use crate::geometry::{build_shifted_family, ExponentSet, ShiftedDyadicFamily};
use crate::grid::{estimate_doubling, DoublingReport, Grid, GridFunction, MeasureTable};
use crate::operators::{apply_i_alpha_with, apply_m_alpha_centered, shifted_dyadic_max, KernelRule};

/// Relative tolerance of the homogeneity check `ratio(5f) = ratio(f)`.
const HOMOGENEITY_TOL: f64 = 1e-12;

/// One resolution of a refinement sweep.
pub struct Level {
    pub grid: Grid,
    pub measure: MeasureTable,
    pub doubling: Option<DoublingReport>,
}

impl Level {
    /// Reverse-doubling exponent, zero when the grid is too coarse to tell.
    pub fn eta(&self) -> f64 {
        self.doubling.as_ref().map_or(0.0, DoublingReport::min_eta)
    }
}

pub fn build_levels(cfg: &ExperimentConfig) -> Result<Vec<Level>> {
    (0..=cfg.refinements)
        .map(|l| {
            let grid = cfg.grid_at(l)?;
            let w = cfg.weight_on(&grid)?;
            let measure = MeasureTable::new(&grid, &w)?;
            let doubling = estimate_doubling(&w, &grid).ok();
            Ok(Level { grid, measure, doubling })
        })
        .collect()
}

fn doubling_warnings(levels: &[Level], out: &mut ExperimentResult) {
    match &levels[0].doubling {
        Some(d) if !d.all_doubling() => {
            out.warnings.push(format!("weight does not look rectangle doubling (gamma {:?}, eta {:?})", d.gamma, d.eta))
        }
        None => out.warnings.push("grid too coarse to estimate doubling".into()),
        _ => {}
    }
}

/// `(f_l)` for every trial, drawn on every level.
fn trial_functions(cfg: &ExperimentConfig, levels: &[Level]) -> Result<Vec<Vec<GridFunction>>> {
    let grids: Vec<Grid> = levels.iter().map(|l| l.grid.clone()).collect();
    (0..cfg.trials)
        .map(|t| draw_nonzero(cfg.family, cfg.seed, t, &cfg.domain, &grids).map(|(_, fs)| fs))
        .collect()
}

struct Sample {
    ratio: f64,
    extra: Vec<String>,
    /// Failed pointwise checks found while computing the sample.
    violations: Vec<String>,
}

/// Shared driver: computes one ratio per (trial, level), records the
/// per-level maxima and checks their growth against `cfg.growth_cap`.
fn refinement_sweep<F>(
    experiment: &str,
    cfg: &ExperimentConfig,
    levels: &[Level],
    extra_columns: &[&str],
    sample: F,
) -> Result<ExperimentResult>
where
    F: Fn(usize, usize, &GridFunction) -> Result<Sample> + Sync + Send,
{
    let mut columns = vec!["trial", "level", "cells", "ratio"];
    columns.extend_from_slice(extra_columns);
    let mut out = ExperimentResult::new(experiment, cfg, &columns);
    doubling_warnings(levels, &mut out);
    let fs = trial_functions(cfg, levels)?;
    let nl = levels.len();
    let samples = exec::map_range(cfg.trials * nl, |k| {
        let (t, l) = (k / nl, k % nl);
        sample(t, l, &fs[t][l])
    });
    let mut max_ratio = vec![0.0f64; nl];
    for (k, s) in samples.into_iter().enumerate() {
        let s = s?;
        let (t, l) = (k / nl, k % nl);
        if !s.ratio.is_finite() {
            out.violations.push(format!("trial {t} level {l}: ratio {} is not finite", s.ratio));
        }
        max_ratio[l] = max_ratio[l].max(s.ratio);
        out.violations.extend(s.violations.into_iter().map(|v| format!("trial {t} level {l}: {v}")));
        let mut row = vec![t.to_string(), l.to_string(), levels[l].grid.len().to_string(), fmt_f64(s.ratio)];
        row.extend(s.extra);
        out.push_row(row);
    }
    let growth: Vec<f64> = max_ratio.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    for (l, g) in growth.iter().enumerate() {
        if !(*g <= cfg.growth_cap) {
            out.violations.push(format!(
                "max ratio grew by {:.2}% from level {l} to {}, cap {:.2}%",
                100.0 * g,
                l + 1,
                100.0 * cfg.growth_cap
            ));
        }
    }
    out.set("counts_per_level", levels.iter().map(|l| l.grid.counts()).collect::<Vec<_>>());
    out.set("max_ratio", &max_ratio);
    out.set("mean_ratio_level0", {
        let r0: Vec<f64> = out.rows.iter().filter(|r| r[1] == "0").map(|r| r[3].parse().unwrap()).collect();
        r0.iter().sum::<f64>() / r0.len() as f64
    });
    out.set("growth", &growth);
    out.set("max_growth", growth.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    out.set("growth_cap", cfg.growth_cap);
    if let Some(d) = &levels[0].doubling {
        out.set("gamma", &d.gamma);
        out.set("eta", &d.eta);
        out.set("is_doubling", d.all_doubling());
    }
    Ok(out)
}

fn hls_ratio(f: &GridFunction, m: &MeasureTable, e: &ExponentSet, rule: KernelRule) -> Result<(f64, f64, f64)> {
    let i = apply_i_alpha_with(f, m, e, rule)?;
    let num = m.lp_norm(&i.values, e.q)?;
    let den = m.lp_norm(f, e.p)?;
    Ok((num / den, num, den))
}

/// `||I_alpha f||_q / ||f||_p` per trial across refinements.
pub fn run_hls_ratio(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let e = cfg.exponents()?;
    let levels = build_levels(cfg)?;
    let mut out = refinement_sweep("hls_ratio", cfg, &levels, &["norm_if_q", "norm_f_p", "skipped_mass"], |_, l, f| {
        let lv = &levels[l];
        let i = apply_i_alpha_with(f, &lv.measure, &e, cfg.quadrature)?;
        let num = lv.measure.lp_norm(&i.values, e.q)?;
        let den = lv.measure.lp_norm(f, e.p)?;
        Ok(Sample {
            ratio: num / den,
            extra: vec![fmt_f64(num), fmt_f64(den), fmt_f64(i.skipped_mass)],
            violations: Vec::new(),
        })
    })?;
    let f0 = draw_nonzero(cfg.family, cfg.seed, 0, &cfg.domain, &[levels[0].grid.clone()])?.1.remove(0);
    let (r1, ..) = hls_ratio(&f0, &levels[0].measure, &e, cfg.quadrature)?;
    let (r5, ..) = hls_ratio(&f0.scaled(5.0)?, &levels[0].measure, &e, cfg.quadrature)?;
    let rel = (r5 - r1).abs() / r1;
    out.set("homogeneity_rel_error", rel);
    if !(rel <= HOMOGENEITY_TOL) {
        out.violations.push(format!("ratio changed by {rel:e} under f -> 5f"));
    }
    out.set("alpha", e.alpha);
    out.set("quadrature", cfg.quadrature);
    Ok(out)
}

/// `||M_alpha f||_q / ||f||_p` across refinements, with the pointwise
/// domination of the centered operator by the shifted dyadic ones.
pub fn run_maximal_regularity(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let e = cfg.exponents()?;
    let levels = build_levels(cfg)?;
    let families: Vec<ShiftedDyadicFamily> = levels.iter().map(|l| build_shifted_family(&l.grid)).collect();
    let mut out = refinement_sweep("maximal_regularity", cfg, &levels, &["norm_m_q", "domination"], |_, l, f| {
        let lv = &levels[l];
        let m = &lv.measure;
        let centered = apply_m_alpha_centered(f, m, &e, false)?;
        let dyadic = shifted_dyadic_max(f, m, e.kernel_exponent(), &families[l])?;
        let mut domination = 0.0f64;
        let mut violations = Vec::new();
        for (x, (c, d)) in centered.samples().iter().zip(&dyadic).enumerate() {
            if *d > 0.0 {
                domination = domination.max(c / d);
            } else if *c > 0.0 {
                violations.push(format!("cell {x}: dyadic maximal function vanishes where the centered one is {c}"));
            }
        }
        let num = m.lp_norm(&centered.values, e.q)?;
        let den = m.lp_norm(f, e.p)?;
        Ok(Sample { ratio: num / den, extra: vec![fmt_f64(num), fmt_f64(domination)], violations })
    })?;
    let domination = out.rows.iter().map(|r| r[5].parse::<f64>().unwrap()).fold(0.0, f64::max);
    out.set("domination_constant", domination);
    out.set("shifted_systems", families[0].system_count());
    out.set("alpha", e.alpha);
    Ok(out)
}

/// Carleson sum over the configured shifted system, normalized by `||f||_p`,
/// with summation exponent `r = (p + q)/2`.
pub fn run_carleson(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let e = cfg.exponents()?;
    let levels = build_levels(cfg)?;
    let families: Vec<ShiftedDyadicFamily> = levels.iter().map(|l| build_shifted_family(&l.grid)).collect();
    let mut out = refinement_sweep("carleson", cfg, &levels, &["carleson_sum"], |_, l, f| {
        let lv = &levels[l];
        let s = carleson_sum(f, &lv.measure, &e, &families[l], &cfg.shift, e.r)?;
        let den = lv.measure.lp_norm(f, e.p)?;
        Ok(Sample { ratio: s / den, extra: vec![fmt_f64(s)], violations: Vec::new() })
    })?;
    out.set("summation_exponent", e.r);
    out.set("shift", &cfg.shift);
    Ok(out)
}

/// Pointwise audit of the cone pieces against their Hedberg-type bound.
pub fn run_hedberg(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let e = cfg.exponents()?;
    let levels = build_levels(cfg)?;
    let columns = ["profile_max", "pairs", "skipped", "underflow", "clamped_tau", "argmax_cell", "argmax_cone"];
    let mut out = refinement_sweep("hedberg", cfg, &levels, &columns, |_, l, f| {
        let lv = &levels[l];
        let r = hedberg_audit_with(f, &lv.measure, &e, cfg.quadrature, lv.eta())?;
        let violations = if r.violations > 0 {
            vec![format!("{} cone pieces are positive where the bound vanishes", r.violations)]
        } else {
            Vec::new()
        };
        Ok(Sample {
            ratio: r.max_ratio,
            extra: vec![
                fmt_f64(r.profile_max),
                r.pairs_evaluated.to_string(),
                r.skipped_pairs.to_string(),
                r.underflow_pairs.to_string(),
                r.clamped_tau.to_string(),
                r.argmax_cell.map_or(String::new(), |c| c.to_string()),
                r.argmax_cone.map_or(String::new(), |c| c.to_string().replace(',', " ")),
            ],
            violations,
        })
    })?;
    out.set("eta_per_level", levels.iter().map(Level::eta).collect::<Vec<_>>());
    out.set("quadrature", cfg.quadrature);
    Ok(out)
}

/// Doubling and reverse-doubling estimates of the configured weight.
pub fn run_doubling(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let grid = cfg.base_grid()?;
    let w = cfg.weight_on(&grid)?;
    let report = estimate_doubling(&w, &grid)?;
    let mut out = ExperimentResult::new("doubling", cfg, &["axis", "level", "length", "gamma", "eta"]);
    for s in &report.per_scale {
        out.push_row(vec![
            s.axis.to_string(),
            s.level.to_string(),
            fmt_f64(s.length),
            fmt_f64(s.gamma),
            fmt_f64(s.eta),
        ]);
    }
    out.set("gamma", &report.gamma);
    out.set("eta", &report.eta);
    out.set("is_doubling", &report.is_doubling);
    out.set("all_doubling", report.all_doubling());
    out.set("scales_examined", &report.scales_examined);
    out.summary.insert("weight".into(), json!(cfg.weight));
    Ok(out)
}
