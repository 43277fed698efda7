use super::space::Grid;
use crate::error::{Error, Result};

/// Nonnegative finite samples on the cells of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if let Some((k, v)) = samples.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidFunction(format!("sample {v} at cell {k} is not nonnegative and finite")));
        }
        Ok(Self { samples })
    }

    /// Checks the length against `grid` as well.
    pub fn on(grid: &Grid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: samples.len() });
        }
        Self::new(samples)
    }

    pub fn zeros(len: usize) -> Self {
        Self { samples: vec![0.0; len] }
    }

    pub fn constant(len: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; len])
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new((0..grid.len()).map(|i| f(&grid.center(i))).collect())
    }

    /// Indicator of a single cell.
    pub fn delta(len: usize, cell: usize) -> Self {
        let mut samples = vec![0.0; len];
        samples[cell] = 1.0;
        Self { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.samples.iter().map(|v| v * c).collect())
    }

    pub fn powf(&self, p: f64) -> Self {
        Self { samples: self.samples.iter().map(|v| v.powf(p)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GridFunction::new(vec![0.0, 1.0]).is_ok());
        assert!(GridFunction::new(vec![-1e-300]).is_err());
        assert!(GridFunction::new(vec![f64::INFINITY]).is_err());
        let g = Grid::uniform(1, 0.0, 1.0, 4).unwrap();
        assert!(GridFunction::on(&g, vec![0.0; 5]).is_err());
    }

    #[test]
    fn helpers() {
        let f = GridFunction::delta(4, 2);
        assert_eq!(f.samples(), &[0.0, 0.0, 1.0, 0.0]);
        assert!(!f.is_zero());
        assert!(GridFunction::zeros(3).is_zero());
        assert_eq!(f.scaled(3.0).unwrap().max(), 3.0);
    }
}
