use serde::{Deserialize, Serialize};

use super::space::Grid;
use crate::error::{Error, Result};

/// Analytic family of a density, or `Custom` for arbitrary positive samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightKind {
    Lebesgue,
    /// `prod |x_i|^{a_i}`, each `a_i > -1`.
    ProductPower { exponents: Vec<f64> },
    /// `prod e^{|x_i|}`.
    ProductExponential,
    Custom,
}

impl WeightKind {
    fn validate(&self, n: usize) -> Result<()> {
        if let WeightKind::ProductPower { exponents } = self {
            if exponents.len() != n {
                return Err(Error::InvalidWeight(format!(
                    "{} power exponents for dimension {n}",
                    exponents.len()
                )));
            }
            if let Some(a) = exponents.iter().find(|a| !(a.is_finite() && **a > -1.0)) {
                return Err(Error::InvalidWeight(format!("power exponent {a} must exceed -1")));
            }
        }
        Ok(())
    }

    /// One-dimensional factor on axis `i`, for the separable kinds.
    fn factor(&self, i: usize, x: f64) -> Option<f64> {
        match self {
            WeightKind::Lebesgue => Some(1.0),
            WeightKind::ProductPower { exponents } => {
                let a = exponents[i];
                Some(if a == 0.0 { 1.0 } else { x.abs().powf(a) })
            }
            WeightKind::ProductExponential => Some(x.abs().exp()),
            WeightKind::Custom => None,
        }
    }
}

/// Density samples `w(x) > 0` at the cell centers of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    kind: WeightKind,
    samples: Vec<f64>,
    axis_factors: Option<Vec<Vec<f64>>>,
}

impl Weight {
    pub fn lebesgue(grid: &Grid) -> Self {
        Self::from_kind(WeightKind::Lebesgue, grid).expect("lebesgue weight is valid")
    }

    /// Samples an analytic kind at the cell centers.
    pub fn from_kind(kind: WeightKind, grid: &Grid) -> Result<Self> {
        Self::from_kind_dilated(kind, grid, &vec![0; grid.dim()])
    }

    /// Samples `x -> w(2^{s} x)` at the cell centers, i.e. the density of the
    /// dilated measure. The samples coincide bit for bit with
    /// `from_kind(kind, &grid.scaled(s))`.
    pub fn from_kind_dilated(kind: WeightKind, grid: &Grid, log2_factors: &[i32]) -> Result<Self> {
        if matches!(kind, WeightKind::Custom) {
            return Err(Error::InvalidWeight("custom weights need explicit samples".into()));
        }
        kind.validate(grid.dim())?;
        let scaled = grid.scaled(log2_factors)?;
        let axis_factors: Vec<Vec<f64>> = scaled
            .axes()
            .iter()
            .enumerate()
            .map(|(i, a)| (0..a.count).map(|k| kind.factor(i, a.center(k)).unwrap()).collect())
            .collect();
        for (i, fac) in axis_factors.iter().enumerate() {
            if let Some((k, v)) = fac.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::InvalidWeight(format!(
                    "weight factor {v} at axis {i} cell {k} is not positive and finite"
                )));
            }
        }
        let samples = tensor_product(&axis_factors);
        Ok(Self { kind, samples, axis_factors: Some(axis_factors) })
    }

    pub fn custom(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: samples.len() });
        }
        if let Some((k, v)) = samples.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidWeight(format!("sample {v} at cell {k} is not positive and finite")));
        }
        Ok(Self { kind: WeightKind::Custom, samples, axis_factors: None })
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Per-axis density factors when the weight is a tensor product.
    pub fn axis_factors(&self) -> Option<&[Vec<f64>]> {
        self.axis_factors.as_deref()
    }
}

/// Lexicographic tensor product of per-axis vectors (first axis slowest).
pub(crate) fn tensor_product(factors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![1.0];
    for fac in factors {
        let mut next = Vec::with_capacity(out.len() * fac.len());
        for &a in &out {
            next.extend(fac.iter().map(|&b| a * b));
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_weight_validation() {
        let g = Grid::uniform(2, -1.0, 1.0, 8).unwrap();
        let bad = WeightKind::ProductPower { exponents: vec![-1.0, 0.0] };
        assert!(Weight::from_kind(bad, &g).is_err());
        let short = WeightKind::ProductPower { exponents: vec![1.0] };
        assert!(Weight::from_kind(short, &g).is_err());
        // odd symmetric grid puts a center on 0
        let odd = Grid::uniform(1, -1.0, 1.0, 9).unwrap();
        assert!(Weight::from_kind(WeightKind::ProductPower { exponents: vec![1.0] }, &odd).is_err());
    }

    #[test]
    fn product_samples() {
        let g = Grid::uniform(2, -2.0, 2.0, 4).unwrap();
        let w = Weight::from_kind(WeightKind::ProductPower { exponents: vec![1.0, 2.0] }, &g).unwrap();
        for i in 0..g.len() {
            let c = g.center(i);
            let expect = c[0].abs() * c[1].abs().powf(2.0);
            assert!((w.samples()[i] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn dilated_matches_scaled_grid() {
        let g = Grid::uniform(2, -8.0, 8.0, 16).unwrap();
        let kind = WeightKind::ProductExponential;
        let a = Weight::from_kind_dilated(kind.clone(), &g, &[1, 2]).unwrap();
        let b = Weight::from_kind(kind, &g.scaled(&[1, 2]).unwrap()).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn custom_rejects_nonpositive() {
        let g = Grid::uniform(1, 0.0, 1.0, 4).unwrap();
        assert!(Weight::custom(&g, vec![1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(Weight::custom(&g, vec![1.0; 3]).is_err());
        assert!(Weight::custom(&g, vec![2.0; 4]).unwrap().axis_factors().is_none());
    }
}
