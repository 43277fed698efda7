use crate::error::{Error, Result};
use crate::geometry::{ConeIndex, ExponentSet};
use crate::grid::{GridFunction, MeasureTable};
use crate::operators::{ConeDecomposition, KernelRule};

/// Fraction of the `f^p` mass around each cell that lies in each cone.
///
/// The fractions are taken relative to the mass of the cells that differ
/// from `x` in every coordinate, the set the cones tile, so they sum to one
/// wherever that mass is positive. Cells where it vanishes get all-zero
/// fractions and are listed in `empty_cells`.
#[derive(Clone, Debug)]
pub struct ThetaField {
    cones: Vec<ConeIndex>,
    values: Vec<f64>,
    /// `||f||_p` over the whole grid.
    pub norm_p: f64,
    pub empty_cells: Vec<usize>,
    len: usize,
}

pub fn compute_theta(f: &GridFunction, m: &MeasureTable, e: &ExponentSet) -> Result<ThetaField> {
    let fmax = f.max();
    if fmax == 0.0 {
        return Err(Error::Degenerate("cone fractions of the zero function".into()));
    }
    // fractions are scale-free; normalizing first keeps a small f from
    // underflowing in f^p
    let unit = f.scaled(1.0 / fmax)?;
    let norm_p = fmax * m.lp_norm(&unit, e.p)?;
    let fp = unit.powf(e.p);
    let dec = ConeDecomposition::compute(fp.samples(), m, 0.0, KernelRule::Midpoint)?;
    let nc = dec.cones().len();
    let mut values = vec![0.0; m.len() * nc];
    let mut empty_cells = Vec::new();
    for x in 0..m.len() {
        let total = dec.total(x);
        if total > 0.0 {
            for (c, v) in dec.row(x).iter().enumerate() {
                values[x * nc + c] = v / total;
            }
        } else {
            empty_cells.push(x);
        }
    }
    Ok(ThetaField { cones: dec.cones().to_vec(), values, norm_p, empty_cells, len: m.len() })
}

impl ThetaField {
    pub fn cones(&self) -> &[ConeIndex] {
        &self.cones
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, x: usize, cone: usize) -> f64 {
        self.values[x * self.cones.len() + cone]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let nc = self.cones.len();
        &self.values[x * nc..(x + 1) * nc]
    }

    /// Samples of one cone; zero for cones absent from the grid.
    pub fn field(&self, t: &ConeIndex) -> Vec<f64> {
        match self.cones.iter().position(|c| c == t) {
            Some(c) => (0..self.len).map(|x| self.get(x, c)).collect(),
            None => vec![0.0; self.len],
        }
    }

    pub fn sum_at(&self, x: usize) -> f64 {
        self.row(x).iter().sum()
    }
}
