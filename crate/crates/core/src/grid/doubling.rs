use serde::{Deserialize, Serialize};

use super::space::Grid;
use super::weight::Weight;
use crate::error::{Error, Result};

/// Largest allowed rise of the per-octave doubling exponent between
/// consecutive scales before an axis is reported as not doubling.
pub const DOUBLING_GROWTH_TOLERANCE: f64 = 0.5;

const MAX_SLICES: usize = 64;

/// Extremes of `log2(w(2Q) / w(Q))` at one dyadic scale of one axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleStats {
    pub axis: usize,
    pub level: u32,
    pub length: f64,
    pub gamma: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoublingReport {
    pub gamma: Vec<f64>,
    pub eta: Vec<f64>,
    pub is_doubling: Vec<bool>,
    pub scales_examined: Vec<f64>,
    pub per_scale: Vec<ScaleStats>,
}

impl DoublingReport {
    pub fn all_doubling(&self) -> bool {
        self.is_doubling.iter().all(|&b| b)
    }

    /// Smallest reverse-doubling exponent over the axes.
    pub fn min_eta(&self) -> f64 {
        self.eta.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Evenly spaced subsample of `0..total`, or everything when small.
fn slice_indices(total: usize) -> Vec<usize> {
    if total <= MAX_SLICES {
        (0..total).collect()
    } else {
        (0..MAX_SLICES).map(|j| j * (total - 1) / (MAX_SLICES - 1)).collect()
    }
}

/// Sweeps interior dyadic intervals `Q` on every axis (those whose double
/// `2Q` stays in the domain) over sampled coordinate lines, recording the
/// largest and smallest doubling exponents.
pub fn estimate_doubling(w: &Weight, grid: &Grid) -> Result<DoublingReport> {
    if w.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), found: w.len() });
    }
    if let Some(a) = grid.axes().iter().find(|a| a.count < 8) {
        return Err(Error::InvalidGrid(format!("doubling estimate needs 8 cells per axis, got {}", a.count)));
    }
    let n = grid.dim();
    let mut report = DoublingReport {
        gamma: vec![0.0; n],
        eta: vec![0.0; n],
        is_doubling: vec![true; n],
        scales_examined: Vec::new(),
        per_scale: Vec::new(),
    };
    let samples = w.samples();
    for i in 0..n {
        let axis = grid.axis(i);
        let c = axis.count;
        let stride = grid.strides()[i];
        let cross = grid.len() / c;
        // line start offsets for the sampled cross-sections
        let starts: Vec<usize> = slice_indices(cross)
            .into_iter()
            .map(|j| {
                let (outer, inner) = (j / stride, j % stride);
                outer * stride * c + inner
            })
            .collect();
        let k_max = (usize::BITS - 1 - c.leading_zeros()).saturating_sub(1);
        let mut gammas = Vec::new();
        let (mut g_all, mut e_all) = (f64::NEG_INFINITY, f64::INFINITY);
        for k in 1..=k_max {
            let parts = 1usize << k;
            let len = axis.length() / parts as f64;
            let (mut g, mut e) = (f64::NEG_INFINITY, f64::INFINITY);
            for m in 1..parts.saturating_sub(1) {
                let q0 = axis.lo + m as f64 * len;
                let q = axis.cells_in(q0, q0 + len);
                let d = axis.cells_in(q0 - 0.5 * len, q0 + 1.5 * len);
                for &s in &starts {
                    let sum = |(a, b): (usize, usize)| (a..b).map(|k| samples[s + k * stride]).sum::<f64>();
                    let (sq, sd) = (sum(q), sum(d));
                    if !(sq > 0.0) {
                        return Err(Error::Degenerate(format!("zero weight on a dyadic interval of axis {i}")));
                    }
                    let ratio = (sd / sq).log2();
                    g = g.max(ratio);
                    e = e.min(ratio);
                }
            }
            if g.is_finite() {
                report.per_scale.push(ScaleStats { axis: i, level: k, length: len, gamma: g, eta: e });
                if !report.scales_examined.contains(&len) {
                    report.scales_examined.push(len);
                }
                gammas.push(g);
                g_all = g_all.max(g);
                e_all = e_all.min(e);
            }
        }
        if gammas.is_empty() {
            return Err(Error::InvalidGrid(format!("axis {i} has no interior dyadic intervals")));
        }
        report.gamma[i] = g_all.max(0.0);
        report.eta[i] = e_all.max(0.0);
        // gammas run from coarse to fine; a doubling weight has a scale-stable exponent
        let growth = gammas.windows(2).map(|p| p[0] - p[1]).fold(0.0, f64::max);
        report.is_doubling[i] = growth <= DOUBLING_GROWTH_TOLERANCE;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WeightKind;

    #[test]
    fn lebesgue_doubles_exactly() {
        let g = Grid::uniform(2, 0.0, 1.0, 32).unwrap();
        let r = estimate_doubling(&Weight::lebesgue(&g), &g).unwrap();
        for i in 0..2 {
            assert!((r.gamma[i] - 1.0).abs() < 1e-9);
            assert!((r.eta[i] - 1.0).abs() < 1e-9);
        }
        assert!(r.all_doubling());
        assert_eq!(r.scales_examined, vec![0.25, 0.125, 0.0625]);
    }

    #[test]
    fn exponential_is_flagged() {
        let g = Grid::uniform(2, -8.0, 8.0, 64).unwrap();
        let w = Weight::from_kind(WeightKind::ProductExponential, &g).unwrap();
        let r = estimate_doubling(&w, &g).unwrap();
        assert!(r.is_doubling.iter().all(|&b| !b));
        let coarse = r.per_scale.iter().find(|s| s.axis == 0).unwrap();
        let fine = r.per_scale.iter().rev().find(|s| s.axis == 0).unwrap();
        assert!(coarse.gamma > fine.gamma);
    }

    #[test]
    fn power_weight_is_doubling() {
        let g = Grid::uniform(2, -1.0, 1.0, 64).unwrap();
        let w = Weight::from_kind(WeightKind::ProductPower { exponents: vec![1.0, 1.0] }, &g).unwrap();
        let r = estimate_doubling(&w, &g).unwrap();
        assert!(r.all_doubling());
        assert!(r.min_eta() > 0.0);
        assert!(r.gamma.iter().all(|g| g.is_finite() && *g > 1.0));
    }

    #[test]
    fn small_grids_rejected() {
        let g = Grid::uniform(1, 0.0, 1.0, 4).unwrap();
        assert!(estimate_doubling(&Weight::lebesgue(&g), &g).is_err());
    }
}
