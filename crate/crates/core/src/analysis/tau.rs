use super::theta::ThetaField;
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{ConeIndex, ExponentSet};
use crate::grid::MeasureTable;
use crate::operators::OperatorResult;

const BISECTION_STEPS: usize = 60;

/// `mu{|x_i - y_i| <= 2^{tau - t_i}}^{1/r}` with the continuous rectangle
/// measure, nondecreasing in `tau`.
fn scale_profile(m: &MeasureTable, x: &[f64], t: &[u32], tau: f64, r: f64) -> f64 {
    let half: Vec<f64> = t.iter().map(|&ti| (tau - ti as f64).exp2()).collect();
    m.continuous_rect_measure(x, &half).powf(1.0 / r)
}

/// Bisection bracket: the low end keeps every half-width below half a cell,
/// the high end makes every half-width exceed the diameter.
fn bracket(m: &MeasureTable, t: &[u32]) -> (f64, f64) {
    let g = m.grid();
    let lo = (0.5 * g.min_spacing()).log2() - 1.0;
    let hi = g.diameter().log2() + *t.iter().max().unwrap() as f64 + 1.0;
    (lo, hi)
}

/// Solves `mu{|x_i - y_i| <= 2^{tau - t_i}}^{1/r} = target` for `tau`.
/// Returns the solution and whether it was clamped to the bracket.
fn solve_target(m: &MeasureTable, x: &[f64], t: &[u32], target: f64, r: f64) -> Result<(f64, bool)> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold target {target} must be positive")));
    }
    let (mut lo, mut hi) = bracket(m, t);
    if scale_profile(m, x, t, hi, r) < target {
        return Ok((hi, true));
    }
    if scale_profile(m, x, t, lo, r) >= target {
        return Ok((lo, true));
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if scale_profile(m, x, t, mid, r) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((hi, false))
}

/// Splitting scale for the cone `t` at cell `x`, where the target is
/// `theta_t(x)^{1/p} ||f||_p / M_beta f(x)`.
pub fn solve_tau(
    t: &ConeIndex,
    x: usize,
    theta: &ThetaField,
    mbeta: &OperatorResult,
    m: &MeasureTable,
    e: &ExponentSet,
) -> Result<(f64, bool)> {
    let c = theta
        .cones()
        .iter()
        .position(|v| v == t)
        .ok_or_else(|| Error::InvalidArgument(format!("cone {t} is empty on this grid")))?;
    let mb = mbeta.samples()[x];
    let target = theta.get(x, c).powf(1.0 / e.p) * theta.norm_p / mb;
    solve_target(m, &m.grid().center(x), t.as_slice(), target, e.r)
}

/// Closed form on Lebesgue measure away from the boundary:
/// `tau = (r log2 target - n + sum t_i) / n`.
pub fn tau_lebesgue(t: &ConeIndex, target: f64, r: f64) -> f64 {
    let n = t.dim() as f64;
    (r * target.log2() - n + t.weight() as f64) / n
}

/// Splitting scales for every cone and cell with a positive mass fraction.
#[derive(Clone, Debug)]
pub struct TauField {
    pub cones: Vec<ConeIndex>,
    /// `N x T` row-major, `NaN` where undefined.
    pub tau: Vec<f64>,
    pub clamped: Vec<bool>,
}

impl TauField {
    pub fn get(&self, x: usize, cone: usize) -> Option<(f64, bool)> {
        let k = x * self.cones.len() + cone;
        (!self.tau[k].is_nan()).then(|| (self.tau[k], self.clamped[k]))
    }

    pub fn clamped_count(&self) -> usize {
        self.clamped.iter().filter(|&&c| c).count()
    }
}

pub fn solve_tau_field(theta: &ThetaField, mbeta: &OperatorResult, m: &MeasureTable, e: &ExponentSet) -> Result<TauField> {
    let nc = theta.cones().len();
    let grid = m.grid();
    let rows = exec::map_range(m.len(), |x| {
        let xc = grid.center(x);
        let mb = mbeta.samples()[x];
        (0..nc)
            .map(|c| {
                let th = theta.get(x, c);
                if th <= 0.0 || mb <= 0.0 {
                    return Ok((f64::NAN, false));
                }
                let target = th.powf(1.0 / e.p) * theta.norm_p / mb;
                solve_target(m, &xc, theta.cones()[c].as_slice(), target, e.r)
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut tau = Vec::with_capacity(m.len() * nc);
    let mut clamped = Vec::with_capacity(m.len() * nc);
    for row in rows {
        for (v, c) in row? {
            tau.push(v);
            clamped.push(c);
        }
    }
    Ok(TauField { cones: theta.cones().to_vec(), tau, clamped })
}
