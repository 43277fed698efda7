use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One factor of the product grid: `count` cells of equal width on `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidGrid(format!("axis bounds [{lo}, {hi}) are not an interval")));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!("axis count {count} < 2")));
        }
        Ok(Self { lo, hi, count })
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    /// Cell-center coordinate `lo + (k + 1/2) h`.
    pub fn center(&self, k: usize) -> f64 {
        self.lo + (k as f64 + 0.5) * self.spacing()
    }

    /// Left edge of cell `k` (`k == count` gives `hi`).
    pub fn edge(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.spacing()
    }

    /// First cell index whose center fails `pred`, assuming `pred` holds on a
    /// prefix of the cells and fails on the rest.
    pub fn partition_point(&self, pred: impl Fn(f64) -> bool) -> usize {
        let (mut lo, mut hi) = (0usize, self.count);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if pred(self.center(mid)) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Half-open index range of cells whose centers lie in `[a, b)`.
    pub fn cells_in(&self, a: f64, b: f64) -> (usize, usize) {
        let first = self.partition_point(|c| c < a);
        let end = self.partition_point(|c| c < b).max(first);
        (first, end)
    }

    /// Half-open index range of cells whose centers satisfy `|x - c| < r`.
    pub fn cells_within_open(&self, x: f64, r: f64) -> (usize, usize) {
        let first = self.partition_point(|c| x - c >= r);
        let end = self.partition_point(|c| c - x < r).max(first);
        (first, end)
    }

    /// Half-open index range of cells whose centers satisfy `|x - c| <= r`.
    pub fn cells_within_closed(&self, x: f64, r: f64) -> (usize, usize) {
        let first = self.partition_point(|c| x - c > r);
        let end = self.partition_point(|c| c - x <= r).max(first);
        (first, end)
    }

    /// Position of `x` in cell units, `0` at `lo` and `count` at `hi`, clamped.
    pub fn fractional_position(&self, x: f64) -> f64 {
        ((x - self.lo) / self.spacing()).clamp(0.0, self.count as f64)
    }

    /// The same axis with its bounds multiplied by `2^log2_factor`.
    pub fn scaled(&self, log2_factor: i32) -> Axis {
        let s = 2f64.powi(log2_factor);
        Axis { lo: self.lo * s, hi: self.hi * s, count: self.count }
    }
}

/// Tensor-product grid of cell centers; cells are numbered lexicographically
/// with the first axis varying slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        for a in &axes {
            Axis::new(a.lo, a.hi, a.count)?;
        }
        let mut strides = vec![1usize; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].count;
        }
        let len = strides[0] * axes[0].count;
        Ok(Self { axes, strides, len })
    }

    /// `n` identical axes on `[lo, hi)` with `count` cells each.
    pub fn uniform(n: usize, lo: f64, hi: f64, count: usize) -> Result<Self> {
        let axis = Axis::new(lo, hi, count)?;
        Self::new(vec![axis; n])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn spacing(&self, i: usize) -> f64 {
        self.axes[i].spacing()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::spacing).collect()
    }

    /// Product of the spacings.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(f64::INFINITY, f64::min)
    }

    /// Euclidean diameter of the grid box.
    pub fn diameter(&self) -> f64 {
        self.axes.iter().map(|a| a.length() * a.length()).sum::<f64>().sqrt()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.dim());
        multi.iter().zip(&self.strides).map(|(k, s)| k * s).sum()
    }

    pub fn unravel_into(&self, mut idx: usize, out: &mut [usize]) {
        for (o, s) in out.iter_mut().zip(&self.strides) {
            *o = idx / s;
            idx %= s;
        }
    }

    pub fn unravel(&self, idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        self.unravel_into(idx, &mut out);
        out
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        let multi = self.unravel(idx);
        multi.iter().zip(&self.axes).map(|(&k, a)| a.center(k)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.axes).all(|(&v, a)| v >= a.lo && v <= a.hi)
    }

    /// Same domain with every count doubled.
    pub fn refined(&self) -> Grid {
        let axes = self
            .axes
            .iter()
            .map(|a| Axis { lo: a.lo, hi: a.hi, count: a.count * 2 })
            .collect();
        Grid::new(axes).expect("refining a valid grid")
    }

    /// Same counts on the domain stretched by `2^{e_i}` along axis `i`.
    ///
    /// Cell `k` of the result has center `2^{e}` times the center of cell `k`
    /// here, exactly in floating point, so a grid function keeps its sample
    /// array under the dilation.
    pub fn scaled(&self, log2_factors: &[i32]) -> Result<Grid> {
        if log2_factors.len() != self.dim() {
            return Err(Error::InvalidArgument(format!(
                "{} scale exponents for a {}-dimensional grid",
                log2_factors.len(),
                self.dim()
            )));
        }
        Grid::new(self.axes.iter().zip(log2_factors).map(|(a, &e)| a.scaled(e)).collect())
    }

    /// True when every count is a power of two.
    pub fn is_dyadic(&self) -> bool {
        self.axes.iter().all(|a| a.count.is_power_of_two())
    }

    /// Number of cells sharing at least one coordinate with a cell, including itself.
    pub fn coincident_cells(&self) -> usize {
        let all: usize = self.len;
        let off: usize = self.axes.iter().map(|a| a.count - 1).product();
        all - off
    }
}
