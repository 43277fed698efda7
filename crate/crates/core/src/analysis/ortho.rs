use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::fit::linear_fit;
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{ConeIndex, ExponentSet};
use crate::grid::{GridFunction, MeasureTable};
use crate::operators::{cone_decomposition, ConeDecomposition};

/// One value of the cross-term functional
/// `B(h) = int sum_t (Delta_t I f)(Delta_{t-h} I f)^{q-1} dmu`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthoRecord {
    pub h: Vec<i64>,
    pub value: f64,
}

impl OrthoRecord {
    pub fn log2_value(&self) -> f64 {
        self.value.log2()
    }
}

/// Axis sweeps `h = k e_i`, `0 <= k <= h_max`, with per-axis decay fits of
/// `log2 B` against `k`; `epsilon_i` is the negated slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthoSweep {
    pub records: Vec<OrthoRecord>,
    pub epsilon: Vec<f64>,
    pub r_squared: Vec<f64>,
    /// Sweep points left out of the fits because `B(h) = 0`.
    pub zero_points: usize,
}

/// Cone pieces of `I_alpha f` prepared for repeated evaluation of `B(h)`.
#[derive(Clone, Debug)]
pub struct OrthoContext {
    dec: ConeDecomposition,
    mass: Vec<f64>,
    q: f64,
}

fn check_q(q: f64) -> Result<()> {
    if !(q.fract() == 0.0 && q >= 2.0) {
        return Err(Error::InvalidExponents(format!("cross-term functional needs an integer q >= 2, got {q}")));
    }
    Ok(())
}

impl OrthoContext {
    pub fn new(f: &GridFunction, m: &MeasureTable, e: &ExponentSet) -> Result<Self> {
        check_q(e.q)?;
        let dec = cone_decomposition(f, m, e)?;
        Ok(Self { dec, mass: m.cell_mass().to_vec(), q: e.q })
    }

    pub fn cones(&self) -> &[ConeIndex] {
        self.dec.cones()
    }

    /// `B(h)`; `t - h` is renormalized by a uniform shift, so `h` matters
    /// only up to adding a constant to every entry.
    pub fn value(&self, h: &[i64]) -> Result<f64> {
        let cones = self.dec.cones();
        if h.len() != self.dec.layout().dim() {
            return Err(Error::InvalidArgument(format!("shift {h:?} has the wrong length")));
        }
        let partner: Vec<Option<usize>> = cones
            .iter()
            .map(|t| {
                let shifted: Vec<i64> = t.to_i64().iter().zip(h).map(|(a, b)| a - b).collect();
                self.dec.layout().cone_id(&ConeIndex::normalize(&shifted).0)
            })
            .collect();
        if partner.iter().all(Option::is_none) {
            return Ok(0.0);
        }
        let pow = (self.q - 1.0) as i32;
        let per_cell = exec::map_range(self.dec.len(), |x| {
            let row = self.dec.row(x);
            let s: f64 = partner
                .iter()
                .enumerate()
                .filter_map(|(c, p)| p.map(|p| row[c] * row[p].powi(pow)))
                .sum();
            s * self.mass[x]
        });
        Ok(per_cell.iter().sum())
    }

    /// Normalized shifts `t - t'` over all pairs of cones present on the grid.
    pub fn reachable_shifts(&self) -> Vec<Vec<i64>> {
        let cones = self.dec.cones();
        let mut set = BTreeSet::new();
        for a in cones {
            for b in cones {
                let d: Vec<i64> = a.to_i64().iter().zip(b.to_i64()).map(|(x, y)| x - y).collect();
                set.insert(ConeIndex::normalize(&d).0.to_i64());
            }
        }
        set.into_iter().collect()
    }

    pub fn sweep(&self, h_max: u32) -> Result<OrthoSweep> {
        let n = self.dec.layout().dim();
        let mut records = Vec::new();
        let mut epsilon = Vec::with_capacity(n);
        let mut r_squared = Vec::with_capacity(n);
        let mut zero_points = 0;
        for i in 0..n {
            let (mut xs, mut ys) = (Vec::new(), Vec::new());
            for k in 0..=h_max as i64 {
                let mut h = vec![0i64; n];
                h[i] = k;
                let value = self.value(&h)?;
                if value > 0.0 {
                    xs.push(k as f64);
                    ys.push(value.log2());
                } else {
                    zero_points += 1;
                }
                records.push(OrthoRecord { h, value });
            }
            match linear_fit(&xs, &ys) {
                Some(fit) => {
                    epsilon.push(-fit.slope);
                    r_squared.push(fit.r_squared);
                }
                None => {
                    epsilon.push(f64::NAN);
                    r_squared.push(f64::NAN);
                }
            }
        }
        Ok(OrthoSweep { records, epsilon, r_squared, zero_points })
    }
}

/// `B(h)` for a single shift.
pub fn ortho_functional(f: &GridFunction, m: &MeasureTable, e: &ExponentSet, h: &[i64]) -> Result<OrthoRecord> {
    let ctx = OrthoContext::new(f, m, e)?;
    Ok(OrthoRecord { h: h.to_vec(), value: ctx.value(h)? })
}
