//! Evaluation of `sum_y V(x, y)^a g(y) mu(y)` resolved by cone bins.
//!
//! For product measures the kernel factorizes over the axes and the sum is a
//! sequence of one-axis contractions, each splitting its axis into per-axis
//! bins; otherwise every pair of cells is visited.

use serde::{Deserialize, Serialize};

use crate::exec;
use crate::geometry::ConeLayout;
use crate::grid::MeasureTable;

/// Quadrature used for the singular kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRule {
    /// Kernel sampled at cell centers; cells sharing a coordinate with `x`
    /// are skipped.
    #[default]
    Midpoint,
    /// Each axis factor is replaced by its exact cell average for the
    /// Lebesgue profile `|2u|^a`, which also gives coincident cells a finite
    /// contribution. Removes the leading-order singular bias of `Midpoint`.
    Corrected,
}

/// Ratio of the cell average of `|2u|^a` over the cell at offset `d` to its
/// value at the closed-rectangle width `2d + 1` (all in cell units).
pub fn correction_factor(d: usize, a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    if d == 0 {
        return 1.0 / (a + 1.0);
    }
    let m = d as f64 + 0.5;
    m * -((a + 1.0) * (-1.0 / m).ln_1p()).exp_m1() / (a + 1.0)
}

/// Weight of a single axis: `(mass of |k - x| <= d)^a` times the correction,
/// with the coincident offset dropped under `Midpoint`.
fn axis_kernel(mass: &[f64], a: f64, rule: KernelRule) -> Vec<f64> {
    let c = mass.len();
    let mut prefix = vec![0.0; c + 1];
    for k in 0..c {
        prefix[k + 1] = prefix[k] + mass[k];
    }
    let corr: Vec<f64> = (0..c).map(|d| correction_factor(d, a)).collect();
    let mut k = vec![0.0; c * c];
    for x in 0..c {
        for y in 0..c {
            let d = x.abs_diff(y);
            if d == 0 && rule == KernelRule::Midpoint {
                continue;
            }
            let span = prefix[(x + d + 1).min(c)] - prefix[x.saturating_sub(d)];
            let v = if rule == KernelRule::Corrected { span.powf(a) * corr[d] } else { span.powf(a) };
            k[x * c + y] = v * mass[y];
        }
    }
    k
}

/// Returns an `N x B` row-major array: for every cell `x`, the kernel sum
/// split over the joint cone bins of `layout` (`B = 1` without a layout).
pub(crate) fn kernel_sums(
    m: &MeasureTable,
    g: &[f64],
    a: f64,
    rule: KernelRule,
    layout: Option<&ConeLayout>,
) -> Vec<f64> {
    if m.is_product() {
        separable(m, g, a, rule, layout)
    } else {
        direct(m, g, a, rule, layout)
    }
}

fn separable(m: &MeasureTable, g: &[f64], a: f64, rule: KernelRule, layout: Option<&ConeLayout>) -> Vec<f64> {
    let grid = m.grid();
    let n = grid.dim();
    let counts = grid.counts();
    let bins: Vec<usize> = (0..n).map(|i| layout.map_or(1, |l| l.axis_bins(i))).collect();
    // state layout: (x_0, b_0, ..., x_{i-1}, b_{i-1}, y_i, ..., y_{n-1})
    // the axis kernels carry the per-axis masses of y
    let mut state = g.to_vec();
    let mut outer = 1usize;
    for i in 0..n {
        let c = counts[i];
        let b = bins[i];
        let inner: usize = counts[i + 1..].iter().product();
        let kernel = axis_kernel(m.axis_mass(i).unwrap(), a, rule);
        let bin_of: Vec<usize> = (0..c * c)
            .map(|xy| layout.map_or(0, |l| l.offset_bin(i, (xy / c).abs_diff(xy % c))))
            .collect();
        let mut next = vec![0.0; outer * c * b * inner];
        let src = &state;
        exec::for_each_chunk_mut(&mut next, b * inner, |idx, chunk| {
            let (o, x) = (idx / c, idx % c);
            for y in 0..c {
                let kv = kernel[x * c + y];
                if kv == 0.0 {
                    continue;
                }
                let s = &src[(o * c + y) * inner..(o * c + y + 1) * inner];
                let bin = bin_of[x * c + y];
                let d = &mut chunk[bin * inner..(bin + 1) * inner];
                for (dv, sv) in d.iter_mut().zip(s) {
                    *dv += kv * sv;
                }
            }
        });
        state = next;
        outer *= c * b;
    }
    if layout.is_none() {
        return state;
    }
    // (x_0, b_0, x_1, b_1, ...) -> (x_0, x_1, ..., b_0, b_1, ...)
    let total_bins: usize = bins.iter().product();
    let mut out = vec![0.0; grid.len() * total_bins];
    let mut xm = vec![0usize; n];
    let mut bm = vec![0usize; n];
    for (pos, &v) in state.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut rem = pos;
        for i in (0..n).rev() {
            bm[i] = rem % bins[i];
            rem /= bins[i];
            xm[i] = rem % counts[i];
            rem /= counts[i];
        }
        let x = grid.index(&xm);
        let mut bin = 0;
        for i in 0..n {
            bin = bin * bins[i] + bm[i];
        }
        out[x * total_bins + bin] = v;
    }
    out
}

fn direct(m: &MeasureTable, g: &[f64], a: f64, rule: KernelRule, layout: Option<&ConeLayout>) -> Vec<f64> {
    let grid = m.grid();
    let n = grid.dim();
    let counts = grid.counts();
    let total_bins = layout.map_or(1, ConeLayout::bin_count);
    let prefix = m.prefix();
    let mass = m.cell_mass();
    let corr: Vec<Vec<f64>> = counts.iter().map(|&c| (0..c).map(|d| correction_factor(d, a)).collect()).collect();
    let rows = exec::map_range(grid.len(), |x| {
        let mut row = vec![0.0; total_bins];
        let xm = grid.unravel(x);
        let mut ym = vec![0usize; n];
        let (mut lo, mut hi) = (vec![0usize; n], vec![0usize; n]);
        for y in 0..grid.len() {
            if g[y] == 0.0 {
                continue;
            }
            grid.unravel_into(y, &mut ym);
            let mut bin = 0;
            let mut factor = 1.0;
            let mut coincident = false;
            for i in 0..n {
                let d = xm[i].abs_diff(ym[i]);
                coincident |= d == 0;
                lo[i] = xm[i].saturating_sub(d);
                hi[i] = (xm[i] + d + 1).min(counts[i]);
                if let Some(l) = layout {
                    bin += l.offset_bin(i, d) * l.bin_strides()[i];
                }
                if rule == KernelRule::Corrected {
                    factor *= corr[i][d];
                }
            }
            if coincident && rule == KernelRule::Midpoint {
                continue;
            }
            let v = prefix.box_sum(&lo, &hi);
            row[bin] += v.powf(a) * factor * g[y] * mass[y];
        }
        row
    });
    rows.concat()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correction_matches_quadrature() {
        for a in [-0.75, -0.5, -0.25, 0.5] {
            for d in [1usize, 2, 7, 1000] {
                // midpoint quadrature of the cell average of |2u|^a / (2d+1)^a
                let steps = 200_000;
                let (l, r) = (d as f64 - 0.5, d as f64 + 0.5);
                let mut s = 0.0;
                for k in 0..steps {
                    let u = l + (k as f64 + 0.5) * (r - l) / steps as f64;
                    s += (2.0 * u.abs()).powf(a);
                }
                s /= steps as f64;
                let expect = s / (2.0 * d as f64 + 1.0).powf(a);
                let got = correction_factor(d, a);
                assert!((got - expect).abs() < 2e-3 * expect, "a={a} d={d}: {got} vs {expect}");
            }
        }
        assert_eq!(correction_factor(5, 0.0), 1.0);
        assert_eq!(correction_factor(0, -0.75), 4.0);
    }
}
