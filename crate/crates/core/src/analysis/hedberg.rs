use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::tau::solve_tau_field;
use super::theta::compute_theta;
use crate::error::Result;
use crate::exec;
use crate::geometry::{ConeIndex, ExponentSet};
use crate::grid::{estimate_doubling, GridFunction, MeasureTable, Weight};
use crate::operators::{apply_m_alpha_centered, cone_decomposition_with, KernelRule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub level: i64,
    pub max_ratio: f64,
}

/// Pointwise comparison of each cone piece of the fractional integral with
/// `theta^{(1/p)(1 - r/q)} (M_beta f)^{r/q} ||f||_p^{1 - r/q}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HedbergReport {
    pub max_ratio: f64,
    pub argmax_cell: Option<usize>,
    pub argmax_cone: Option<ConeIndex>,
    pub pairs_evaluated: usize,
    /// Pairs where both sides vanish.
    pub skipped_pairs: usize,
    /// Pairs with a vanishing bound but a positive cone piece.
    pub violations: usize,
    /// Pairs whose bound vanished only because `f^p` underflows on the cone.
    pub underflow_pairs: usize,
    /// Per level `j`, the largest ratio of the level-`j` shell of a cone to
    /// the bound damped by `2^{-eta |j - tau| min(alpha - beta, n/q)}`.
    pub profile: Vec<LevelProfile>,
    pub profile_max: f64,
    pub eta: f64,
    pub clamped_tau: usize,
}

/// Runs the audit with the reverse-doubling exponent estimated from the
/// measure, or zero when the grid is too coarse to estimate it.
pub fn hedberg_audit(f: &GridFunction, m: &MeasureTable, e: &ExponentSet) -> Result<HedbergReport> {
    let grid = m.grid();
    let vol = grid.cell_volume();
    let w = Weight::custom(grid, m.cell_mass().iter().map(|v| v / vol).collect())?;
    let eta = estimate_doubling(&w, grid).map(|r| r.min_eta()).unwrap_or(0.0);
    hedberg_audit_with(f, m, e, KernelRule::Midpoint, eta)
}

/// Audit with an explicit quadrature for the cone pieces and an explicit
/// reverse-doubling exponent.
pub fn hedberg_audit_with(
    f: &GridFunction,
    m: &MeasureTable,
    e: &ExponentSet,
    rule: KernelRule,
    eta: f64,
) -> Result<HedbergReport> {
    let dec = cone_decomposition_with(f, m, e, rule)?;
    let theta = compute_theta(f, m, e)?;
    let mbeta = apply_m_alpha_centered(f, m, e, true)?;
    let tau = solve_tau_field(&theta, &mbeta, m, e)?;
    let split = e.split();
    let theta_pow = (1.0 - split) / e.p;
    let norm_part = theta.norm_p.powf(1.0 - split);
    let rate = e.decay_rate();
    let nc = dec.cones().len();

    struct Cell {
        best: (f64, usize),
        evaluated: usize,
        skipped: usize,
        violations: usize,
        underflow: usize,
        levels: Vec<(i64, f64)>,
    }
    let fmax = f.max();
    let grid = m.grid();
    // true when every sample of f on the cone vanishes once raised to p
    let underflows = |x: usize, c: usize| {
        let xm = grid.unravel(x);
        let mut ym = vec![0; grid.dim()];
        (0..m.len()).all(|y| {
            grid.unravel_into(y, &mut ym);
            dec.layout().classify_cells(&xm, &ym).is_none_or(|(cy, _)| cy != c) || (f.samples()[y] / fmax).powf(e.p) == 0.0
        })
    };
    let cells = exec::map_range(m.len(), |x| {
        let mut out = Cell { best: (0.0, 0), evaluated: 0, skipped: 0, violations: 0, underflow: 0, levels: Vec::new() };
        let mb = mbeta.samples()[x].powf(split);
        let mut rhs = vec![0.0; nc];
        for (c, r) in rhs.iter_mut().enumerate() {
            let lhs = dec.value(x, c);
            *r = theta.get(x, c).powf(theta_pow) * mb * norm_part;
            if *r == 0.0 {
                if lhs == 0.0 {
                    out.skipped += 1;
                } else if underflows(x, c) {
                    out.underflow += 1;
                } else {
                    out.violations += 1;
                }
                continue;
            }
            out.evaluated += 1;
            let ratio = lhs / *r;
            if ratio > out.best.0 {
                out.best = (ratio, c);
            }
        }
        for (c, j, v) in dec.levels(x) {
            if let (Some((t, _)), true) = (tau.get(x, c), rhs[c] > 0.0) {
                let damp = (-eta * (j as f64 - t).abs() * rate).exp2();
                out.levels.push((j, v / (damp * rhs[c])));
            }
        }
        out
    });

    let mut report = HedbergReport {
        max_ratio: 0.0,
        argmax_cell: None,
        argmax_cone: None,
        pairs_evaluated: 0,
        skipped_pairs: 0,
        violations: 0,
        underflow_pairs: 0,
        profile: Vec::new(),
        profile_max: 0.0,
        eta,
        clamped_tau: tau.clamped_count(),
    };
    let mut profile: BTreeMap<i64, f64> = BTreeMap::new();
    for (x, cell) in cells.into_iter().enumerate() {
        report.pairs_evaluated += cell.evaluated;
        report.skipped_pairs += cell.skipped;
        report.violations += cell.violations;
        report.underflow_pairs += cell.underflow;
        if cell.evaluated > 0 && cell.best.0 > report.max_ratio {
            report.max_ratio = cell.best.0;
            report.argmax_cell = Some(x);
            report.argmax_cone = Some(dec.cones()[cell.best.1].clone());
        }
        for (j, v) in cell.levels {
            let slot = profile.entry(j).or_insert(0.0);
            *slot = slot.max(v);
        }
    }
    report.profile = profile.into_iter().map(|(level, max_ratio)| LevelProfile { level, max_ratio }).collect();
    report.profile_max = report.profile.iter().map(|p| p.max_ratio).fold(0.0, f64::max);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConeLayout;
    use crate::grid::Grid;

    #[test]
    fn localized_function() {
        let g = Grid::uniform(2, 0.0, 1.0, 16).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let e = ExponentSet::new(2, 2.0, 4.0).unwrap();
        let f = GridFunction::from_fn(&g, |x| if x[0] < 0.25 && x[1] < 0.5 { 1.0 } else { 0.0 }).unwrap();
        let r = hedberg_audit(&f, &m, &e).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.skipped_pairs > 0);
        assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
        assert!((r.eta - 1.0).abs() < 1e-9);
        assert!(!r.profile.is_empty() && r.profile_max.is_finite());
        let cones = ConeLayout::new(&g).cones().len();
        assert_eq!(r.pairs_evaluated + r.skipped_pairs, g.len() * cones);
    }

    #[test]
    fn underflow_is_not_a_violation() {
        let g = Grid::uniform(2, 0.0, 1.0, 8).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let e = ExponentSet::new(2, 2.0, 4.0).unwrap();
        let mut v = vec![1e-200; 64];
        v[0] = 1.0;
        let r = hedberg_audit_with(&GridFunction::new(v).unwrap(), &m, &e, KernelRule::Midpoint, 1.0).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.underflow_pairs > 0);
    }
}
