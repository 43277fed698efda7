use super::kernel::{kernel_sums, KernelRule};
use super::result::OperatorResult;
use crate::error::{Error, Result};
use crate::geometry::{ConeIndex, ConeLayout, ExponentSet};
use crate::grid::{GridFunction, MeasureTable};

fn check_shape(f: &GridFunction, m: &MeasureTable) -> Result<()> {
    if f.len() != m.len() {
        return Err(Error::ShapeMismatch { expected: m.len(), found: f.len() });
    }
    Ok(())
}

/// Per-cell mass of the cells sharing at least one coordinate with the cell.
pub fn coincident_mass(m: &MeasureTable) -> Vec<f64> {
    let grid = m.grid();
    let n = grid.dim();
    let counts = grid.counts();
    let mut out = Vec::with_capacity(grid.len());
    let mut xm = vec![0; n];
    let (mut lo, mut hi) = (vec![0; n], vec![0; n]);
    for x in 0..grid.len() {
        grid.unravel_into(x, &mut xm);
        // off-axis mass by inclusion-exclusion over the hyperplanes through x
        let mut off = 0.0;
        for mask in 0..(1usize << n) {
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    (lo[i], hi[i]) = (xm[i], xm[i] + 1);
                } else {
                    (lo[i], hi[i]) = (0, counts[i]);
                }
            }
            let v = m.box_measure(&lo, &hi);
            if mask.count_ones() % 2 == 0 {
                off += v;
            } else {
                off -= v;
            }
        }
        out.push((m.total() - off).max(0.0));
    }
    out
}

fn max_skipped(m: &MeasureTable, rule: KernelRule) -> f64 {
    match rule {
        KernelRule::Midpoint => coincident_mass(m).into_iter().fold(0.0, f64::max),
        KernelRule::Corrected => 0.0,
    }
}

/// `sum_y f(y) V(x, y)^{alpha/n - 1} mu(y)` at a free `0 < alpha < n`.
pub fn fractional_integral(f: &GridFunction, m: &MeasureTable, alpha: f64, rule: KernelRule) -> Result<OperatorResult> {
    check_shape(f, m)?;
    let n = m.dim() as f64;
    if !(alpha > 0.0 && alpha < n) {
        return Err(Error::InvalidExponents(format!("alpha = {alpha} outside (0, {n})")));
    }
    let values = kernel_sums(m, f.samples(), alpha / n - 1.0, rule, None);
    Ok(OperatorResult {
        values: GridFunction::new(values)?,
        skipped_mass: max_skipped(m, rule),
        exponents: None,
    })
}

/// The strong fractional integral with the midpoint kernel.
pub fn apply_i_alpha(f: &GridFunction, m: &MeasureTable, e: &ExponentSet) -> Result<OperatorResult> {
    apply_i_alpha_with(f, m, e, KernelRule::Midpoint)
}

pub fn apply_i_alpha_with(f: &GridFunction, m: &MeasureTable, e: &ExponentSet, rule: KernelRule) -> Result<OperatorResult> {
    check_dim(m, e)?;
    let mut r = fractional_integral(f, m, e.alpha, rule)?;
    r.exponents = Some(*e);
    Ok(r)
}

fn check_dim(m: &MeasureTable, e: &ExponentSet) -> Result<()> {
    if e.n != m.dim() {
        return Err(Error::InvalidExponents(format!("exponents for n = {} on a {}-dimensional grid", e.n, m.dim())));
    }
    Ok(())
}

/// Kernel sums at every cell split by cone and level.
#[derive(Clone, Debug)]
pub struct ConeDecomposition {
    layout: ConeLayout,
    bins: Vec<f64>,
    cone_values: Vec<f64>,
    len: usize,
}

impl ConeDecomposition {
    /// Evaluates `sum_y V(x, y)^a g(y) mu(y)` restricted to each cone.
    pub fn compute(g: &[f64], m: &MeasureTable, a: f64, rule: KernelRule) -> Result<Self> {
        if g.len() != m.len() {
            return Err(Error::ShapeMismatch { expected: m.len(), found: g.len() });
        }
        let layout = ConeLayout::new(m.grid());
        let bins = kernel_sums(m, g, a, rule, Some(&layout));
        let (len, nb, nc) = (m.len(), layout.bin_count(), layout.cones().len());
        let mut cone_values = vec![0.0; len * nc];
        for x in 0..len {
            for b in 0..nb {
                if let Some((c, _)) = layout.bin_cone(b) {
                    cone_values[x * nc + c] += bins[x * nb + b];
                }
            }
        }
        Ok(Self { layout, bins, cone_values, len })
    }

    pub fn layout(&self) -> &ConeLayout {
        &self.layout
    }

    pub fn cones(&self) -> &[ConeIndex] {
        self.layout.cones()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Value of cone `c` at cell `x`.
    pub fn value(&self, x: usize, c: usize) -> f64 {
        self.cone_values[x * self.cones().len() + c]
    }

    /// All cone values at `x`, indexed by cone id.
    pub fn row(&self, x: usize) -> &[f64] {
        let nc = self.cones().len();
        &self.cone_values[x * nc..(x + 1) * nc]
    }

    /// Samples of one cone over the grid; zero for cones absent from the grid.
    pub fn cone(&self, t: &ConeIndex) -> Vec<f64> {
        match self.layout.cone_id(t) {
            Some(c) => (0..self.len).map(|x| self.value(x, c)).collect(),
            None => vec![0.0; self.len],
        }
    }

    /// Nonzero `(cone id, level, value)` triples at `x`.
    pub fn levels(&self, x: usize) -> Vec<(usize, i64, f64)> {
        let nb = self.layout.bin_count();
        self.bins[x * nb..(x + 1) * nb]
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .filter_map(|(b, &v)| self.layout.bin_cone(b).map(|(c, j)| (c, j, v)))
            .collect()
    }

    /// Sum over all cones at `x`.
    pub fn total(&self, x: usize) -> f64 {
        self.row(x).iter().sum()
    }
}

/// The strong fractional integral split over all cones (midpoint kernel).
pub fn cone_decomposition(f: &GridFunction, m: &MeasureTable, e: &ExponentSet) -> Result<ConeDecomposition> {
    cone_decomposition_with(f, m, e, KernelRule::Midpoint)
}

/// Cone split under a chosen quadrature; coincident cells belong to no cone.
pub fn cone_decomposition_with(
    f: &GridFunction,
    m: &MeasureTable,
    e: &ExponentSet,
    rule: KernelRule,
) -> Result<ConeDecomposition> {
    check_dim(m, e)?;
    ConeDecomposition::compute(f.samples(), m, e.kernel_exponent(), rule)
}

/// The strong fractional integral restricted to the cone `t`.
pub fn apply_delta_t(f: &GridFunction, m: &MeasureTable, e: &ExponentSet, t: &ConeIndex) -> Result<OperatorResult> {
    check_shape(f, m)?;
    if t.dim() != m.dim() {
        return Err(Error::InvalidArgument(format!("cone index {t} on a {}-dimensional grid", m.dim())));
    }
    let dec = cone_decomposition(f, m, e)?;
    Ok(OperatorResult {
        values: GridFunction::new(dec.cone(t))?,
        skipped_mass: max_skipped(m, KernelRule::Midpoint),
        exponents: Some(*e),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec;
    use crate::grid::{Grid, Weight, WeightKind};

    fn fixture(product: bool) -> (MeasureTable, GridFunction) {
        let g = Grid::uniform(2, -1.0, 1.0, 8).unwrap();
        let w = Weight::from_kind(WeightKind::ProductPower { exponents: vec![1.0, 0.5] }, &g).unwrap();
        let w = if product { w } else { Weight::custom(&g, w.samples().to_vec()).unwrap() };
        let f = GridFunction::from_fn(&g, |x| 1.0 + x[0] * x[0] + (3.0 * x[1]).sin().abs()).unwrap();
        (MeasureTable::new(&g, &w).unwrap(), f)
    }

    #[test]
    fn separable_and_direct_agree() {
        let (mp, f) = fixture(true);
        let (mg, _) = fixture(false);
        let e = ExponentSet::new(2, 2.0, 4.0).unwrap();
        for rule in [KernelRule::Midpoint, KernelRule::Corrected] {
            let a = apply_i_alpha_with(&f, &mp, &e, rule).unwrap();
            let b = apply_i_alpha_with(&f, &mg, &e, rule).unwrap();
            for (x, y) in a.samples().iter().zip(b.samples()) {
                assert!((x - y).abs() < 1e-12 * y.abs(), "{rule:?}: {x} {y}");
            }
        }
        let da = cone_decomposition(&f, &mp, &e).unwrap();
        let db = cone_decomposition(&f, &mg, &e).unwrap();
        for x in 0..f.len() {
            assert_eq!(da.levels(x).len(), db.levels(x).len());
            for (p, q) in da.levels(x).iter().zip(db.levels(x)) {
                assert_eq!((p.0, p.1), (q.0, q.1));
                assert!((p.2 - q.2).abs() < 1e-12 * q.2);
            }
        }
    }

    #[test]
    fn cones_sum_to_integral() {
        let (m, f) = fixture(true);
        let e = ExponentSet::new(2, 2.0, 4.0).unwrap();
        let full = apply_i_alpha(&f, &m, &e).unwrap();
        let dec = cone_decomposition(&f, &m, &e).unwrap();
        for x in 0..f.len() {
            let s = dec.total(x);
            assert!((s - full.samples()[x]).abs() < 1e-12 * s);
        }
    }

    #[test]
    fn sequential_is_bit_identical() {
        let (m, f) = fixture(true);
        let e = ExponentSet::new(2, 1.5, 4.0).unwrap();
        let par = apply_i_alpha(&f, &m, &e).unwrap();
        let seq = exec::sequential(|| apply_i_alpha(&f, &m, &e).unwrap());
        assert_eq!(par, seq);
    }

    #[test]
    fn skipped_mass_is_small() {
        let g = Grid::uniform(2, 0.0, 1.0, 16).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let s = coincident_mass(&m);
        // two full lines minus their crossing
        assert!(s.iter().all(|v| (v - 31.0 / 256.0).abs() < 1e-14));
    }

    #[test]
    fn one_dimensional_single_cone() {
        let g = Grid::uniform(1, 0.0, 1.0, 16).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let f = GridFunction::from_fn(&g, |x| x[0]).unwrap();
        let e = ExponentSet::new(1, 2.0, 4.0).unwrap();
        let d = apply_delta_t(&f, &m, &e, &ConeIndex::origin(1)).unwrap();
        let i = apply_i_alpha(&f, &m, &e).unwrap();
        for (a, b) in d.samples().iter().zip(i.samples()) {
            assert!((a - b).abs() <= 1e-14 * b);
        }
    }
}
