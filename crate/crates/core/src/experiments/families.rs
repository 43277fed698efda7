use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Test functions drawn per trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionFamily {
    /// Independent `U[0,1)` samples per cell, redrawn at every resolution.
    #[default]
    RandomCells,
    /// Sum of one to four positive separable Gaussians.
    GaussianBumps,
    /// Sum of one to four weighted rectangle indicators.
    IndicatorRects,
}

const MAX_ATTEMPTS: u64 = 64;

/// Random stream for the shape parameters of `(trial, attempt)`.
fn spec_stream(trial: usize, attempt: u64) -> u64 {
    ((trial as u64) << 16) | (attempt << 8)
}

/// Seeded ChaCha8 generator on a given stream; streams separate trials,
/// rejection attempts and resolution levels.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug, PartialEq)]
struct Piece {
    center: Vec<f64>,
    width: Vec<f64>,
    amplitude: f64,
}

/// A drawn test function that can be sampled on any grid over the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionDraw {
    family: FunctionFamily,
    seed: u64,
    trial: usize,
    attempt: u64,
    pieces: Vec<Piece>,
}

impl FunctionDraw {
    pub fn new(family: FunctionFamily, seed: u64, trial: usize, attempt: u64, domain: &[[f64; 2]]) -> Self {
        let mut rng = stream_rng(seed, spec_stream(trial, attempt));
        let (scale, amp) = match family {
            FunctionFamily::RandomCells => return Self { family, seed, trial, attempt, pieces: Vec::new() },
            FunctionFamily::GaussianBumps => ((0.1, 0.3), (0.5, 1.0)),
            FunctionFamily::IndicatorRects => ((0.05, 0.25), (0.5, 1.0)),
        };
        let count = rng.random_range(1..=4);
        let pieces = (0..count)
            .map(|_| {
                let center = domain.iter().map(|d| rng.random_range(d[0]..d[1])).collect();
                let width = domain.iter().map(|d| (d[1] - d[0]) * rng.random_range(scale.0..scale.1)).collect();
                Piece { center, width, amplitude: rng.random_range(amp.0..amp.1) }
            })
            .collect();
        Self { family, seed, trial, attempt, pieces }
    }

    pub fn family(&self) -> FunctionFamily {
        self.family
    }

    pub fn attempt(&self) -> u64 {
        self.attempt
    }

    /// Samples at the cell centers; `level` selects the random stream of
    /// the cell family.
    pub fn sample(&self, grid: &Grid, level: u32) -> Result<GridFunction> {
        match self.family {
            FunctionFamily::RandomCells => {
                let stream = spec_stream(self.trial, self.attempt) | (level as u64 + 1);
                let mut rng = stream_rng(self.seed, stream);
                GridFunction::new((0..grid.len()).map(|_| rng.random::<f64>()).collect())
            }
            FunctionFamily::GaussianBumps => GridFunction::from_fn(grid, |x| {
                self.pieces
                    .iter()
                    .map(|b| {
                        let e: f64 = x
                            .iter()
                            .zip(&b.center)
                            .zip(&b.width)
                            .map(|((xi, c), s)| ((xi - c) / s).powi(2))
                            .sum();
                        b.amplitude * (-0.5 * e).exp()
                    })
                    .sum()
            }),
            FunctionFamily::IndicatorRects => GridFunction::from_fn(grid, |x| {
                self.pieces
                    .iter()
                    .filter(|b| x.iter().zip(&b.center).zip(&b.width).all(|((xi, c), w)| (xi - c).abs() <= *w))
                    .map(|b| b.amplitude)
                    .sum()
            }),
        }
    }
}

/// Draws the function of `trial` sampled on every grid, redrawing while any
/// sample set vanishes identically.
pub fn draw_nonzero(
    family: FunctionFamily,
    seed: u64,
    trial: usize,
    domain: &[[f64; 2]],
    grids: &[Grid],
) -> Result<(FunctionDraw, Vec<GridFunction>)> {
    for attempt in 0..MAX_ATTEMPTS {
        let draw = FunctionDraw::new(family, seed, trial, attempt, domain);
        let fs = grids
            .iter()
            .enumerate()
            .map(|(l, g)| draw.sample(g, l as u32))
            .collect::<Result<Vec<_>>>()?;
        if fs.iter().all(|f| !f.is_zero()) {
            return Ok((draw, fs));
        }
    }
    Err(Error::Degenerate(format!("trial {trial}: every draw vanished on some grid")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grids() -> Vec<Grid> {
        let g = Grid::uniform(2, -1.0, 1.0, 8).unwrap();
        vec![g.clone(), g.refined()]
    }

    #[test]
    fn draws_are_reproducible_and_positive() {
        let dom = [[-1.0, 1.0]; 2];
        for family in [FunctionFamily::RandomCells, FunctionFamily::GaussianBumps, FunctionFamily::IndicatorRects] {
            let (a, fa) = draw_nonzero(family, 3, 5, &dom, &grids()).unwrap();
            let (b, fb) = draw_nonzero(family, 3, 5, &dom, &grids()).unwrap();
            assert_eq!(a, b);
            assert_eq!(fa, fb);
            assert!(fa.iter().all(|f| f.max() > 0.0));
            let (_, fc) = draw_nonzero(family, 3, 6, &dom, &grids()).unwrap();
            assert_ne!(fa, fc);
        }
    }

    #[test]
    fn cell_levels_use_distinct_streams() {
        let g = Grid::uniform(1, 0.0, 1.0, 16).unwrap();
        let d = FunctionDraw::new(FunctionFamily::RandomCells, 0, 0, 0, &[[0.0, 1.0]]);
        assert_ne!(d.sample(&g, 0).unwrap(), d.sample(&g, 1).unwrap());
    }

    #[test]
    fn tiny_rectangles_are_redrawn() {
        // two cell centers miss many rectangles, forcing rejections
        let g = Grid::uniform(1, 0.0, 1.0, 2).unwrap();
        let (draw, fs) = draw_nonzero(FunctionFamily::IndicatorRects, 1, 0, &[[0.0, 1.0]], &[g]).unwrap();
        assert!(fs[0].max() > 0.0);
        assert!(draw.attempt() < MAX_ATTEMPTS);
    }
}
