use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grid::Grid;

/// Tolerance, in units of `log2`, within which a distance is treated as
/// lying exactly on a dyadic breakpoint.
pub const BREAKPOINT_SNAP: f64 = 1e-12;

/// `floor(log2 d)` for `d > 0`, with values within [`BREAKPOINT_SNAP`] of an
/// integer snapped onto it so that exact powers of two computed with rounding
/// error still open their own shell.
pub fn dyadic_floor(d: f64) -> i64 {
    debug_assert!(d > 0.0);
    let l = d.log2();
    let r = l.round();
    if (l - r).abs() < BREAKPOINT_SNAP {
        r as i64
    } else {
        l.floor() as i64
    }
}

/// Eccentricity of a dyadic cone: nonnegative with at least one zero entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConeIndex(Vec<u32>);

impl ConeIndex {
    pub fn new(t: Vec<u32>) -> Option<Self> {
        (t.iter().min() == Some(&0)).then_some(Self(t))
    }

    /// The all-zero index.
    pub fn origin(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Shifts `t` by a constant so its minimum is zero; returns the index and
    /// the amount `l` subtracted, so `t_i = normalized_i + l`.
    pub fn normalize(t: &[i64]) -> (Self, i64) {
        let m = *t.iter().min().expect("nonempty index");
        (Self(t.iter().map(|&v| (v - m) as u32).collect()), m)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn to_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&v| v as i64).collect()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// `sum t_i`.
    pub fn weight(&self) -> i64 {
        self.0.iter().map(|&v| v as i64).sum()
    }
}

impl fmt::Display for ConeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Level `j` with `2^{j - t_i} <= |x_i - y_i| < 2^{j + 1 - t_i}` on every axis,
/// if one exists. `t` need not be normalized.
pub fn cone_level(x: &[f64], y: &[f64], t: &[i64]) -> Option<i64> {
    let mut level = None;
    for ((a, b), ti) in x.iter().zip(y).zip(t) {
        let d = (a - b).abs();
        if d == 0.0 {
            return None;
        }
        let j = dyadic_floor(d) + ti;
        match level {
            None => level = Some(j),
            Some(l) if l != j => return None,
            _ => {}
        }
    }
    level
}

/// The unique normalized cone and level containing `y` as seen from `x`,
/// or `None` when the points share a coordinate.
pub fn classify(x: &[f64], y: &[f64]) -> Option<(ConeIndex, i64)> {
    let mut levels = Vec::with_capacity(x.len());
    for (a, b) in x.iter().zip(y) {
        let d = (a - b).abs();
        if d == 0.0 {
            return None;
        }
        levels.push(dyadic_floor(d));
    }
    let j = *levels.iter().max().unwrap();
    let t = levels.iter().map(|&l| (j - l) as u32).collect();
    Some((ConeIndex(t), j))
}

/// Exhaustively checks that the cones around the cell `x` tile every cell
/// that differs from `x` in all coordinates exactly once, testing each cell
/// against every normalized index that occurs anywhere on the grid.
pub fn cone_partition_check(grid: &Grid, x: usize) -> bool {
    let layout = ConeLayout::new(grid);
    let xc = grid.center(x);
    let xm = grid.unravel(x);
    let cones: Vec<Vec<i64>> = layout.cones().iter().map(ConeIndex::to_i64).collect();
    let mut ym = vec![0; grid.dim()];
    for y in 0..grid.len() {
        grid.unravel_into(y, &mut ym);
        let yc = grid.center(y);
        let off_axis = xm.iter().zip(&ym).all(|(a, b)| a != b);
        let hits = cones.iter().filter(|t| cone_level(&xc, &yc, t).is_some()).count();
        if off_axis && hits != 1 || !off_axis && hits != 0 {
            return false;
        }
    }
    true
}

/// Precomputed cone bookkeeping for a grid.
///
/// Along each axis the distance `d h_i` between two cells depends only on
/// the index offset `d`, so cells are sorted into per-axis bins: bin 0 holds
/// the coincident offset and bins `1..` the distinct dyadic levels. A vector
/// of nonzero bins fixes the level on every axis and therefore the cone and
/// its level `j`.
#[derive(Clone, Debug)]
pub struct ConeLayout {
    offset_bin: Vec<Vec<usize>>,
    bin_levels: Vec<Vec<i64>>,
    bin_strides: Vec<usize>,
    bin_count: usize,
    bin_cone: Vec<Option<(usize, i64)>>,
    cones: Vec<ConeIndex>,
    lookup: HashMap<ConeIndex, usize>,
}

impl ConeLayout {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.dim();
        let mut offset_bin = Vec::with_capacity(n);
        let mut bin_levels = Vec::with_capacity(n);
        for a in grid.axes() {
            let h = a.spacing();
            let levels: Vec<i64> = (1..a.count).map(|d| dyadic_floor(d as f64 * h)).collect();
            let mut distinct = levels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let mut bins = vec![0usize];
            bins.extend(levels.iter().map(|l| 1 + distinct.binary_search(l).unwrap()));
            offset_bin.push(bins);
            bin_levels.push(distinct);
        }
        let sizes: Vec<usize> = bin_levels.iter().map(|l| l.len() + 1).collect();
        let mut bin_strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            bin_strides[i] = bin_strides[i + 1] * sizes[i + 1];
        }
        let bin_count = bin_strides[0] * sizes[0];

        let mut raw = vec![None; bin_count];
        let mut seen = Vec::new();
        let mut multi = vec![0usize; n];
        for (b, slot) in raw.iter_mut().enumerate() {
            let mut rem = b;
            for i in 0..n {
                multi[i] = rem / bin_strides[i];
                rem %= bin_strides[i];
            }
            if multi.contains(&0) {
                continue;
            }
            let levels: Vec<i64> = multi.iter().enumerate().map(|(i, &v)| bin_levels[i][v - 1]).collect();
            let j = *levels.iter().max().unwrap();
            let t = ConeIndex(levels.iter().map(|&l| (j - l) as u32).collect());
            *slot = Some((t.clone(), j));
            seen.push(t);
        }
        seen.sort();
        seen.dedup();
        let lookup: HashMap<ConeIndex, usize> = seen.iter().cloned().enumerate().map(|(k, t)| (t, k)).collect();
        let bin_cone = raw.into_iter().map(|e| e.map(|(t, j)| (lookup[&t], j))).collect();
        Self { offset_bin, bin_levels, bin_strides, bin_count, bin_cone, cones: seen, lookup }
    }

    pub fn dim(&self) -> usize {
        self.offset_bin.len()
    }

    /// Normalized cone indices that are nonempty somewhere on the grid, sorted.
    pub fn cones(&self) -> &[ConeIndex] {
        &self.cones
    }

    pub fn cone_id(&self, t: &ConeIndex) -> Option<usize> {
        self.lookup.get(t).copied()
    }

    /// Number of per-axis bins, including the coincident bin 0.
    pub fn axis_bins(&self, i: usize) -> usize {
        self.bin_levels[i].len() + 1
    }

    /// Bin of index offset `d` along axis `i`.
    pub fn offset_bin(&self, i: usize, d: usize) -> usize {
        self.offset_bin[i][d]
    }

    /// Dyadic level of bin `b >= 1` along axis `i`.
    pub fn bin_level(&self, i: usize, b: usize) -> i64 {
        self.bin_levels[i][b - 1]
    }

    /// Total number of joint bins.
    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn bin_strides(&self) -> &[usize] {
        &self.bin_strides
    }

    /// Cone id and level for a joint bin, `None` when some axis coincides.
    pub fn bin_cone(&self, b: usize) -> Option<(usize, i64)> {
        self.bin_cone[b]
    }

    /// Cone id and level of the pair of cells with multi-indices `x`, `y`.
    pub fn classify_cells(&self, x: &[usize], y: &[usize]) -> Option<(usize, i64)> {
        let b: usize = x
            .iter()
            .zip(y)
            .enumerate()
            .map(|(i, (&a, &c))| self.offset_bin[i][a.abs_diff(c)] * self.bin_strides[i])
            .sum();
        self.bin_cone[b]
    }
}
