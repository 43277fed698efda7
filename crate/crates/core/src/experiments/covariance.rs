use super::config::ExperimentConfig;
use super::families::draw_nonzero;
use super::result::{fmt_f64, ExperimentResult};
use crate::analysis::compute_theta;
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::ConeIndex;
use crate::grid::{Grid, MeasureTable, Weight, WeightKind};
use crate::operators::apply_m_alpha_centered;

fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Largest relative difference and the first failing item.
#[derive(Default)]
struct Check {
    compared: usize,
    failures: usize,
    worst: f64,
    first: Option<String>,
}

impl Check {
    fn record(&mut self, diff: f64, tol: f64, what: impl FnOnce() -> String) {
        self.compared += 1;
        self.worst = self.worst.max(diff);
        if !(diff <= tol) {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn merge(&mut self, other: Check) {
        self.compared += other.compared;
        self.failures += other.failures;
        self.worst = self.worst.max(other.worst);
        if self.first.is_none() {
            self.first = other.first;
        }
    }
}

/// Density of the dilated measure `w(2^{-s} x) dx` on `scaled`, whose cell
/// centers are `2^s` times those of the base grid.
fn dilated_weight(w: &Weight, scaled: &Grid, s: &[i32]) -> Result<Weight> {
    match w.kind() {
        WeightKind::Custom => Weight::custom(scaled, w.samples().to_vec()),
        kind => {
            let back: Vec<i32> = s.iter().map(|v| -v).collect();
            Weight::from_kind_dilated(kind.clone(), scaled, &back)
        }
    }
}

/// Rectangle volumes at every cell pair: `V(x, y) = prod 2^{-s} V_s(x', y')`.
fn check_volumes(m: &MeasureTable, ms: &MeasureTable, factor: f64, tol: f64) -> Check {
    let grid = m.grid();
    let n = grid.dim();
    let parts = exec::map_range(grid.len(), |x| {
        let xm = grid.unravel(x);
        let mut ym = vec![0usize; n];
        let mut radius = vec![0usize; n];
        let mut c = Check::default();
        for y in 0..grid.len() {
            grid.unravel_into(y, &mut ym);
            for i in 0..n {
                radius[i] = xm[i].abs_diff(ym[i]);
            }
            let (v, vs) = if radius.contains(&0) {
                (0.0, 0.0)
            } else {
                (m.index_box(&xm, &radius), ms.index_box(&xm, &radius))
            };
            c.record(rel_diff(v, factor * vs), tol, || format!("V at cells ({x}, {y}): {v} vs {}", factor * vs));
        }
        c
    });
    let mut total = Check::default();
    for c in parts {
        total.merge(c);
    }
    total
}

/// Exact dilation identities for rectangle volumes, cone mass fractions and
/// the centered `M_beta`, for every configured dilation exponent vector.
pub fn run_covariance_suite(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let e = cfg.exponents()?;
    let base = cfg.base_grid()?;
    if !base.is_dyadic() {
        return Err(Error::Config(format!("dilation identities need power-of-two counts, got {:?}", base.counts())));
    }
    let w = cfg.weight_on(&base)?;
    let m = MeasureTable::new(&base, &w)?;
    let f = draw_nonzero(cfg.family, cfg.seed, 0, &cfg.domain, std::slice::from_ref(&base))?.1.remove(0);
    let theta = compute_theta(&f, &m, &e)?;
    let mbeta = apply_m_alpha_centered(&f, &m, &e, true)?;
    let n = cfg.dimension;
    let mut columns: Vec<String> = (1..=n).map(|i| format!("s{i}")).collect();
    for name in ["volume", "theta", "m_beta"] {
        columns.push(format!("{name}_failures"));
        columns.push(format!("{name}_max_rel"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut out = ExperimentResult::new("covariance", cfg, &column_refs);
    let tol = cfg.tolerance;
    let mut worst = 0.0f64;

    for s in &cfg.dilations {
        if let Some(i) = (0..n).find(|&i| s[i] >= 31 || base.counts()[i] % (1usize << s[i]) != 0) {
            return Err(Error::Config(format!("dilation {s:?}: 2^{} does not divide count {}", s[i], base.counts()[i])));
        }
        let si: Vec<i32> = s.iter().map(|&v| v as i32).collect();
        let scaled = base.scaled(&si)?;
        let ms = MeasureTable::new(&scaled, &dilated_weight(&w, &scaled, &si)?)?;
        let sum_s: i32 = si.iter().sum();

        let volumes = check_volumes(&m, &ms, 2f64.powi(-sum_s), tol);

        let theta_s = compute_theta(&f, &ms, &e)?;
        let mut th = Check::default();
        if theta_s.cones().len() != theta.cones().len() {
            th.record(f64::INFINITY, tol, || {
                format!("{} cones after dilation, {} before", theta_s.cones().len(), theta.cones().len())
            });
        }
        for (c, t) in theta.cones().iter().enumerate() {
            let shifted: Vec<i64> = t.to_i64().iter().zip(&si).map(|(a, b)| a - *b as i64).collect();
            let ts = ConeIndex::normalize(&shifted).0;
            let Some(cs) = theta_s.cones().iter().position(|u| *u == ts) else {
                th.record(f64::INFINITY, tol, || format!("cone {t} has no image {ts}"));
                continue;
            };
            for x in 0..base.len() {
                let (a, b) = (theta.get(x, c), theta_s.get(x, cs));
                th.record((a - b).abs(), tol, || format!("theta_{t} at cell {x}: {a} vs {b} in cone {ts}"));
            }
        }

        let mbeta_s = apply_m_alpha_centered(&f, &ms, &e, true)?;
        let factor = 2f64.powf(sum_s as f64 * e.beta / n as f64);
        let mut mb = Check::default();
        for (x, (a, b)) in mbeta_s.samples().iter().zip(mbeta.samples()).enumerate() {
            mb.record(rel_diff(*a, factor * b), tol, || format!("M_beta at cell {x}: {a} vs {}", factor * b));
        }

        let mut row: Vec<String> = s.iter().map(|v| v.to_string()).collect();
        for (name, c) in [("volume", volumes), ("theta", th), ("m_beta", mb)] {
            row.push(c.failures.to_string());
            row.push(fmt_f64(c.worst));
            worst = worst.max(c.worst);
            if let Some(first) = c.first {
                out.violations.push(format!("s = {s:?}: {} {name} mismatches of {}, first: {first}", c.failures, c.compared));
            }
        }
        out.push_row(row);
    }
    out.set("max_relative_error", worst);
    out.set("tolerance", tol);
    out.set("dilations", &cfg.dilations);
    Ok(out)
}
