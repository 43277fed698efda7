use super::config::ExperimentConfig;
use super::families::draw_nonzero;
use super::result::{fmt_f64, ExperimentResult};
use crate::analysis::OrthoContext;
use crate::error::{Error, Result};
use crate::operators::apply_i_alpha;

/// `B(h) <= B(0)` holds by Hoelder since `t -> t - h` is injective on cones.
const MONOTONE_TOL: f64 = 1e-9;
const CONSISTENCY_TOL: f64 = 1e-8;

/// Axis sweeps of the cone cross-term functional for the trial-0 function,
/// with decay fits per axis.
pub fn run_ortho_decay(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    if ![2.0, 3.0, 4.0].contains(&cfg.q) {
        return Err(Error::Config(format!("cross-term sweeps use q in {{2, 3, 4}}, got {}", cfg.q)));
    }
    let e = cfg.exponents()?;
    let grid = cfg.base_grid()?;
    let m = crate::grid::MeasureTable::new(&grid, &cfg.weight_on(&grid)?)?;
    let f = draw_nonzero(cfg.family, cfg.seed, 0, &cfg.domain, std::slice::from_ref(&grid))?.1.remove(0);
    let ctx = OrthoContext::new(&f, &m, &e)?;
    let sweep = ctx.sweep(cfg.h_max)?;

    let n = cfg.dimension;
    let mut columns: Vec<String> = (1..=n).map(|i| format!("h{i}")).collect();
    columns.extend(["value".to_string(), "log2_value".to_string()]);
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut out = ExperimentResult::new("ortho_decay", cfg, &column_refs);
    let b0 = sweep.records[0].value;
    let mut worst = 0.0f64;
    for r in &sweep.records {
        let mut row: Vec<String> = r.h.iter().map(|v| v.to_string()).collect();
        row.push(fmt_f64(r.value));
        row.push(fmt_f64(r.log2_value()));
        out.push_row(row);
        if !(r.value >= 0.0 && r.value.is_finite()) {
            out.violations.push(format!("B({:?}) = {} is not finite and nonnegative", r.h, r.value));
        }
        worst = worst.max(r.value / b0);
    }
    if !(worst <= 1.0 + MONOTONE_TOL) {
        out.violations.push(format!("B(h)/B(0) reaches {worst}"));
    }
    for (i, (eps, r2)) in sweep.epsilon.iter().zip(&sweep.r_squared).enumerate() {
        if !(*eps > 0.0) {
            out.violations.push(format!("axis {}: fitted decay rate {eps} is not positive", i + 1));
        }
        if !(*r2 >= cfg.min_r_squared) {
            out.violations.push(format!("axis {}: fit R^2 {r2} below {}", i + 1, cfg.min_r_squared));
        }
    }

    // a shift beyond every cone on the grid gives an empty sum
    let far = ctx.reachable_shifts().iter().flatten().copied().max().unwrap_or(0) + 1;
    let mut h_far = vec![0i64; n];
    h_far[0] = far;
    let b_far = ctx.value(&h_far)?;
    if b_far != 0.0 {
        out.violations.push(format!("B({h_far:?}) = {b_far} beyond the cone range"));
    }

    if e.q == 2.0 {
        let total: f64 = ctx.reachable_shifts().iter().map(|h| ctx.value(h)).sum::<Result<f64>>()?;
        let i = apply_i_alpha(&f, &m, &e)?;
        let direct = m.integrate(&i.values.powf(2.0).into_samples())?;
        let rel = (total - direct).abs() / direct;
        out.set("q2_sum_over_shifts", total);
        out.set("q2_integral", direct);
        out.set("q2_rel_error", rel);
        if !(rel <= CONSISTENCY_TOL) {
            out.violations.push(format!("sum of B(h) over shifts differs from the integral by {rel:e}"));
        }
    }
    out.set("epsilon", &sweep.epsilon);
    out.set("r_squared", &sweep.r_squared);
    out.set("zero_points", sweep.zero_points);
    out.set("max_relative_cross_term", worst);
    out.set("b_beyond_range", b_far);
    out.set("q", e.q);
    out.set("h_max", cfg.h_max);
    Ok(out)
}
