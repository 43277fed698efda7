use super::config::{ExperimentConfig, WeightSpec};
use super::families::draw_nonzero;
use super::result::{fmt_f64, ExperimentResult};
use crate::analysis::linear_fit;
use crate::error::{Error, Result};
use crate::grid::MeasureTable;
use crate::operators::fractional_integral;

/// Scaling test of the exponent relation: for `f_k(x) = f(2^k x)` on
/// Lebesgue measure, `log2(||I_a' f_k||_q / ||f_k||_p)` has slope
/// `alpha - a'` in `k`.
///
/// `f_k` keeps the samples of `f` on the grid whose domain is shrunk by
/// `2^k` along every axis.
pub fn run_dilation_necessity(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if cfg.weight != WeightSpec::Lebesgue {
        return Err(Error::Config("the dilation test needs the lebesgue weight".into()));
    }
    let base = cfg.base_grid()?;
    if !base.is_dyadic() {
        return Err(Error::Config(format!("dilation test needs power-of-two counts, got {:?}", base.counts())));
    }
    let e = cfg.exponents()?;
    let f = draw_nonzero(cfg.family, cfg.seed, 0, &cfg.domain, std::slice::from_ref(&base))?.1.remove(0);
    let n = cfg.dimension;
    let mut out = ExperimentResult::new("dilation_necessity", cfg, &["alpha_prime", "k", "ratio", "log2_ratio"]);
    let mut slopes = Vec::new();
    let mut deviation = 0.0f64;
    for &offset in &cfg.alpha_offsets {
        let a = e.alpha + offset;
        let (mut ks, mut ys) = (Vec::new(), Vec::new());
        for k in 0..=cfg.k_max {
            let grid = base.scaled(&vec![-(k as i32); n])?;
            let m = MeasureTable::lebesgue(&grid);
            let i = fractional_integral(&f, &m, a, cfg.quadrature)?;
            let ratio = m.lp_norm(&i.values, e.q)? / m.lp_norm(&f, e.p)?;
            if !(ratio > 0.0 && ratio.is_finite()) {
                out.violations.push(format!("alpha' = {a}, k = {k}: ratio {ratio} is not positive and finite"));
            }
            ks.push(k as f64);
            ys.push(ratio.log2());
            out.push_row(vec![fmt_f64(a), k.to_string(), fmt_f64(ratio), fmt_f64(ratio.log2())]);
        }
        let expected = -offset;
        let slope = linear_fit(&ks, &ys).map_or(f64::NAN, |fit| fit.slope);
        let dev = (slope - expected).abs();
        if !(dev <= cfg.slope_tolerance) {
            out.violations.push(format!("alpha' = {a}: slope {slope} differs from {expected} by {dev}"));
        }
        deviation = deviation.max(dev);
        slopes.push(serde_json::json!({"alpha_prime": a, "slope": slope, "expected": expected}));
    }
    out.set("alpha", e.alpha);
    out.set("slopes", slopes);
    out.set("max_slope_deviation", deviation);
    out.set("slope_tolerance", cfg.slope_tolerance);
    Ok(out)
}
