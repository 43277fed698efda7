use super::function::GridFunction;
use super::space::Grid;
use super::weight::Weight;
use crate::error::{Error, Result};

/// Exclusive n-dimensional prefix sums, padded by one slot per axis, so the
/// entry at `k` holds the total over cells with every index below `k_i`.
#[derive(Clone, Debug)]
pub struct PrefixTable {
    counts: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<f64>,
}

impl PrefixTable {
    /// `values` are laid out lexicographically over `counts`.
    pub fn new(counts: &[usize], values: &[f64]) -> Self {
        let n = counts.len();
        let dims: Vec<usize> = counts.iter().map(|c| c + 1).collect();
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let size = strides[0] * dims[0];
        let mut data = vec![0.0; size];
        let mut multi = vec![0usize; n];
        for &v in values {
            let pos: usize = multi.iter().zip(&strides).map(|(k, s)| (k + 1) * s).sum();
            data[pos] = v;
            for i in (0..n).rev() {
                multi[i] += 1;
                if multi[i] < counts[i] {
                    break;
                }
                multi[i] = 0;
            }
        }
        for axis in 0..n {
            let s = strides[axis];
            for pos in 0..size {
                if !(pos / s).is_multiple_of(dims[axis]) {
                    data[pos] += data[pos - s];
                }
            }
        }
        Self { counts: counts.to_vec(), strides, data }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Value at a corner of the padded table; `corner_i` ranges over `0..=count_i`.
    pub fn corner(&self, corner: &[usize]) -> f64 {
        self.data[corner.iter().zip(&self.strides).map(|(k, s)| k * s).sum::<usize>()]
    }

    pub fn total(&self) -> f64 {
        *self.data.last().unwrap()
    }

    /// The contiguous run of corners along the last axis with the leading
    /// corner indices fixed.
    pub fn last_axis_line(&self, leading: &[usize]) -> &[f64] {
        let n = self.counts.len();
        let start: usize = leading.iter().zip(&self.strides).map(|(k, s)| k * s).sum();
        &self.data[start..start + self.counts[n - 1] + 1]
    }

    /// Sum over the half-open index box `lo <= k < hi` by inclusion-exclusion.
    pub fn box_sum(&self, lo: &[usize], hi: &[usize]) -> f64 {
        let n = self.counts.len();
        if lo.iter().zip(hi).any(|(a, b)| a >= b) {
            return 0.0;
        }
        let mut acc = 0.0;
        for mask in 0..(1usize << n) {
            let mut pos = 0;
            let mut lows = 0;
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    pos += hi[i] * self.strides[i];
                } else {
                    pos += lo[i] * self.strides[i];
                    lows += 1;
                }
            }
            if lows % 2 == 0 {
                acc += self.data[pos];
            } else {
                acc -= self.data[pos];
            }
        }
        acc
    }

    /// Cumulative mass below a fractional corner `u` (cell units), treating each
    /// cell's mass as uniformly spread over the cell.
    pub fn cumulative(&self, u: &[f64]) -> f64 {
        let n = self.counts.len();
        let mut base = vec![0usize; n];
        let mut theta = vec![0.0; n];
        for i in 0..n {
            let c = self.counts[i];
            let ui = u[i].clamp(0.0, c as f64);
            let k = (ui.floor() as usize).min(c - 1);
            base[i] = k;
            theta[i] = ui - k as f64;
        }
        let mut acc = 0.0;
        for mask in 0..(1usize << n) {
            let mut wgt = 1.0;
            let mut pos = 0;
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    wgt *= theta[i];
                    pos += (base[i] + 1) * self.strides[i];
                } else {
                    wgt *= 1.0 - theta[i];
                    pos += base[i] * self.strides[i];
                }
            }
            if wgt != 0.0 {
                acc += wgt * self.data[pos];
            }
        }
        acc
    }

    /// Mass of the fractional box `a <= u <= b` (cell units).
    pub fn fractional_box(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.counts.len();
        if a.iter().zip(b).any(|(x, y)| x >= y) {
            return 0.0;
        }
        let mut corner = vec![0.0; n];
        let mut acc = 0.0;
        for mask in 0..(1usize << n) {
            let mut lows = 0;
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    corner[i] = b[i];
                } else {
                    corner[i] = a[i];
                    lows += 1;
                }
            }
            let v = self.cumulative(&corner);
            if lows % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        acc.max(0.0)
    }
}

#[derive(Clone, Debug)]
struct AxisMass {
    mass: Vec<f64>,
    prefix: Vec<f64>,
}

impl AxisMass {
    fn new(mass: Vec<f64>) -> Self {
        let mut prefix = Vec::with_capacity(mass.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &m in &mass {
            acc += m;
            prefix.push(acc);
        }
        Self { mass, prefix }
    }

    fn range(&self, lo: usize, hi: usize) -> f64 {
        if lo >= hi {
            0.0
        } else {
            self.prefix[hi] - self.prefix[lo]
        }
    }

    fn cumulative(&self, u: f64) -> f64 {
        let c = self.mass.len();
        let u = u.clamp(0.0, c as f64);
        let k = (u.floor() as usize).min(c - 1);
        self.prefix[k] + (u - k as f64) * self.mass[k]
    }
}

/// Cell masses `w * prod h_i` with prefix sums for O(1) rectangle measures.
///
/// Product weights additionally keep per-axis masses, which the separable
/// operator paths use and which make box measures an n-fold product.
#[derive(Clone, Debug)]
pub struct MeasureTable {
    grid: Grid,
    cell_mass: Vec<f64>,
    prefix: PrefixTable,
    axes: Option<Vec<AxisMass>>,
    total: f64,
}

impl MeasureTable {
    pub fn new(grid: &Grid, weight: &Weight) -> Result<Self> {
        if weight.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: weight.len() });
        }
        let vol = grid.cell_volume();
        let cell_mass: Vec<f64> = weight.samples().iter().map(|w| w * vol).collect();
        let prefix = PrefixTable::new(&grid.counts(), &cell_mass);
        let axes = weight.axis_factors().map(|factors| {
            factors
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let h = grid.spacing(i);
                    AxisMass::new(f.iter().map(|v| v * h).collect())
                })
                .collect()
        });
        let total = cell_mass.iter().sum();
        Ok(Self { grid: grid.clone(), cell_mass, prefix, axes, total })
    }

    pub fn lebesgue(grid: &Grid) -> Self {
        Self::new(grid, &Weight::lebesgue(grid)).expect("shapes agree")
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn len(&self) -> usize {
        self.cell_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cell_mass.is_empty()
    }

    /// `w(x) * prod h_i` per cell.
    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn prefix(&self) -> &PrefixTable {
        &self.prefix
    }

    pub fn is_product(&self) -> bool {
        self.axes.is_some()
    }

    /// Per-axis cell masses of a product measure.
    pub fn axis_mass(&self, i: usize) -> Option<&[f64]> {
        self.axes.as_ref().map(|a| a[i].mass.as_slice())
    }

    /// Measure of the half-open cell-index box `lo <= k < hi`.
    pub fn box_measure(&self, lo: &[usize], hi: &[usize]) -> f64 {
        match &self.axes {
            Some(axes) => axes.iter().zip(lo.iter().zip(hi)).map(|(a, (&l, &h))| a.range(l, h)).product(),
            None => self.prefix.box_sum(lo, hi),
        }
    }

    /// Measure of the cells with `|k_i - center_i| <= radius_i`, clipped.
    pub fn index_box(&self, center: &[usize], radius: &[usize]) -> f64 {
        let (lo, hi) = self.index_box_bounds(center, radius);
        self.box_measure(&lo, &hi)
    }

    pub(crate) fn index_box_bounds(&self, center: &[usize], radius: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let lo = center.iter().zip(radius).map(|(&c, &r)| c.saturating_sub(r)).collect();
        let hi = center
            .iter()
            .zip(radius)
            .zip(self.grid.axes())
            .map(|((&c, &r), a)| (c + r + 1).min(a.count))
            .collect();
        (lo, hi)
    }

    /// Open rectangle `|x_i - y_i| < d_i`, membership decided at cell centers.
    pub fn rect_measure(&self, center: &[f64], half_widths: &[f64]) -> f64 {
        let (lo, hi): (Vec<usize>, Vec<usize>) = self
            .grid
            .axes()
            .iter()
            .zip(center.iter().zip(half_widths))
            .map(|(a, (&x, &d))| a.cells_within_open(x, d))
            .unzip();
        self.box_measure(&lo, &hi)
    }

    /// Closed rectangle `|x_i - y_i| <= d_i`, membership decided at cell centers.
    pub fn closed_rect_measure(&self, center: &[f64], half_widths: &[f64]) -> f64 {
        if half_widths.iter().any(|&d| d < 0.0) {
            return 0.0;
        }
        let (lo, hi): (Vec<usize>, Vec<usize>) = self
            .grid
            .axes()
            .iter()
            .zip(center.iter().zip(half_widths))
            .map(|(a, (&x, &d))| a.cells_within_closed(x, d))
            .unzip();
        self.box_measure(&lo, &hi)
    }

    /// Exact measure of the geometric rectangle `|x_i - y_i| <= d_i` clipped
    /// to the domain, for the density that is constant on each cell. Continuous
    /// and nondecreasing in every `d_i`.
    pub fn continuous_rect_measure(&self, center: &[f64], half_widths: &[f64]) -> f64 {
        let axes = self.grid.axes();
        let a: Vec<f64> =
            axes.iter().zip(center.iter().zip(half_widths)).map(|(ax, (&x, &d))| ax.fractional_position(x - d)).collect();
        let b: Vec<f64> =
            axes.iter().zip(center.iter().zip(half_widths)).map(|(ax, (&x, &d))| ax.fractional_position(x + d)).collect();
        match &self.axes {
            Some(am) => am
                .iter()
                .zip(a.iter().zip(&b))
                .map(|(m, (&lo, &hi))| if lo >= hi { 0.0 } else { (m.cumulative(hi) - m.cumulative(lo)).max(0.0) })
                .product(),
            None => self.prefix.fractional_box(&a, &b),
        }
    }

    /// `sum g * w * prod h` in lexicographic cell order.
    pub fn integrate(&self, g: &[f64]) -> Result<f64> {
        if g.len() != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), found: g.len() });
        }
        Ok(g.iter().zip(&self.cell_mass).map(|(a, m)| a * m).sum())
    }

    pub fn lp_norm(&self, f: &GridFunction, p: f64) -> Result<f64> {
        check_p(p)?;
        if f.len() != self.len() {
            return Err(Error::ShapeMismatch { expected: self.len(), found: f.len() });
        }
        let s: f64 = f.samples().iter().zip(&self.cell_mass).map(|(v, m)| v.powf(p) * m).sum();
        Ok(s.powf(1.0 / p))
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidArgument(format!("norm exponent {p} must be at least 1")));
    }
    Ok(())
}

/// `sum_cells g(x) w(x) prod h_i`, summed in lexicographic cell order.
pub fn integrate(g: &GridFunction, w: &Weight, grid: &Grid) -> Result<f64> {
    for len in [g.len(), w.len()] {
        if len != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: len });
        }
    }
    let vol = grid.cell_volume();
    Ok(g.samples().iter().zip(w.samples()).map(|(a, b)| a * b * vol).sum())
}

/// `(integrate(f^p))^{1/p}`.
pub fn lp_norm(f: &GridFunction, w: &Weight, grid: &Grid, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(integrate(&f.powf(p), w, grid)?.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::WeightKind;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        0.5 + (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn box_sum_matches_direct() {
        let counts = [3usize, 4, 2];
        let mut s = 7;
        let vals: Vec<f64> = (0..24).map(|_| lcg(&mut s)).collect();
        let t = PrefixTable::new(&counts, &vals);
        for lo0 in 0..3 {
            for hi0 in lo0..=3 {
                for lo1 in 0..4 {
                    for hi1 in lo1..=4 {
                        let (lo, hi) = ([lo0, lo1, 0], [hi0, hi1, 2]);
                        let mut direct = 0.0;
                        for a in lo0..hi0 {
                            for b in lo1..hi1 {
                                for c in 0..2 {
                                    direct += vals[a * 8 + b * 2 + c];
                                }
                            }
                        }
                        assert!((t.box_sum(&lo, &hi) - direct).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn cumulative_interpolates_corners() {
        let counts = [2usize, 3];
        let vals = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let t = PrefixTable::new(&counts, &vals);
        assert_eq!(t.cumulative(&[1.0, 2.0]), t.corner(&[1, 2]));
        // half of cell (0,0) plus nothing else
        assert!((t.cumulative(&[0.5, 1.0]) - 0.5).abs() < 1e-15);
        assert!((t.cumulative(&[1.5, 1.0]) - 1.0 - 2.0).abs() < 1e-15);
        assert!((t.fractional_box(&[0.0, 0.0], &[2.0, 3.0]) - 21.0).abs() < 1e-12);
    }

    #[test]
    fn lebesgue_area() {
        let g = Grid::uniform(2, -2.0, 2.0, 128).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let v = m.rect_measure(&[0.0, 0.0], &[1.0, 1.0]);
        assert!((v - 4.0).abs() <= 4.0 * g.max_spacing());
        assert_eq!(m.rect_measure(&[0.0, 0.0], &[0.0, 1.0]), 0.0);
        let c = m.continuous_rect_measure(&[0.1, -0.3], &[0.7, 0.45]);
        assert!((c - 1.4 * 0.9).abs() < 1e-12);
    }

    #[test]
    fn product_and_general_paths_agree() {
        let g = Grid::uniform(2, -1.0, 1.0, 8).unwrap();
        let w = Weight::from_kind(WeightKind::ProductPower { exponents: vec![1.0, 0.5] }, &g).unwrap();
        let prod = MeasureTable::new(&g, &w).unwrap();
        let gen = MeasureTable::new(&g, &Weight::custom(&g, w.samples().to_vec()).unwrap()).unwrap();
        assert!(prod.is_product() && !gen.is_product());
        for (x, d) in [([0.1, -0.2], [0.33, 0.5]), ([0.9, 0.9], [2.0, 0.01]), ([-0.5, 0.0], [0.0625, 0.125])] {
            let a = prod.continuous_rect_measure(&x, &d);
            let b = gen.continuous_rect_measure(&x, &d);
            assert!((a - b).abs() < 1e-13, "{a} {b}");
            assert!((prod.closed_rect_measure(&x, &d) - gen.closed_rect_measure(&x, &d)).abs() < 1e-13);
        }
    }

    #[test]
    fn norms() {
        let g = Grid::uniform(2, 0.0, 1.0, 8).unwrap();
        let w = Weight::lebesgue(&g);
        let one = GridFunction::constant(64, 1.0).unwrap();
        assert!((integrate(&one, &w, &g).unwrap() - 1.0).abs() < 1e-12);
        let c = GridFunction::constant(64, 2.5).unwrap();
        assert!((lp_norm(&c, &w, &g, 3.0).unwrap() - 2.5).abs() < 1e-12);
        assert!(lp_norm(&c, &w, &g, 0.5).is_err());
        assert_eq!(lp_norm(&GridFunction::zeros(64), &w, &g, 2.0).unwrap(), 0.0);
        let m = MeasureTable::new(&g, &w).unwrap();
        assert!((m.lp_norm(&c, 3.0).unwrap() - 2.5).abs() < 1e-12);
    }
}
