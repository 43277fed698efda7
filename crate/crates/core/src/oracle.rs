//! Slow reference implementations by direct summation over cell centers.
//!
//! Nothing here uses prefix tables, cone layouts or precomputed dyadic
//! families; every quantity is a loop over cells with membership decided
//! from the cell centers. Intended for grids of at most a few hundred cells.

use rand::Rng;
use serde::Serialize;

use crate::analysis::{carleson_sum, compute_theta, hedberg_audit_with};
use crate::error::Result;
use crate::experiments::stream_rng;
use crate::geometry::{build_shifted_family, ConeIndex, ExponentSet, SHIFTS};
use crate::grid::{Grid, GridFunction, MeasureTable, Weight, WeightKind};
use crate::operators::{
    apply_delta_t, apply_m_alpha_centered, apply_m_alpha_dyadic, apply_m_mu, fractional_integral, KernelRule,
};

/// Relative slack for center comparisons that are exact in real arithmetic.
const SLACK: f64 = 1e-9;

/// Brute-force evaluator over one grid and measure.
pub struct Oracle {
    grid: Grid,
    mass: Vec<f64>,
    centers: Vec<Vec<f64>>,
}

fn floor_log2(d: f64) -> i64 {
    let l = d.log2();
    if (l - l.round()).abs() < SLACK {
        l.round() as i64
    } else {
        l.floor() as i64
    }
}

impl Oracle {
    pub fn new(grid: &Grid, weight: &Weight) -> Self {
        let vol = grid.cell_volume();
        Self {
            grid: grid.clone(),
            mass: weight.samples().iter().map(|w| w * vol).collect(),
            centers: (0..grid.len()).map(|k| grid.center(k)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    fn measure_where(&self, inside: impl Fn(&[f64]) -> bool) -> f64 {
        self.centers.iter().zip(&self.mass).filter(|(c, _)| inside(c)).map(|(_, m)| m).sum()
    }

    /// Mass of the cells whose centers satisfy `|c_i - x_i| < d_i`.
    pub fn rect_measure(&self, x: &[f64], d: &[f64]) -> f64 {
        self.measure_where(|c| c.iter().zip(x).zip(d).all(|((ci, xi), di)| (ci - xi).abs() < *di))
    }

    /// Mass of the smallest closed rectangle centered at cell `x` containing cell `y`.
    pub fn volume(&self, x: usize, y: usize) -> f64 {
        let (cx, cy) = (&self.centers[x], &self.centers[y]);
        let d: Vec<f64> = cx.iter().zip(cy).map(|(a, b)| (a - b).abs()).collect();
        if d.contains(&0.0) {
            return 0.0;
        }
        self.measure_where(|c| c.iter().zip(cx).zip(&d).all(|((ci, xi), di)| (ci - xi).abs() <= di * (1.0 + SLACK)))
    }

    /// Normalized cone of `y` seen from `x`, or `None` on a shared coordinate.
    pub fn cone_of(&self, x: usize, y: usize) -> Option<ConeIndex> {
        let levels: Option<Vec<i64>> = self.centers[x]
            .iter()
            .zip(&self.centers[y])
            .map(|(a, b)| {
                let d = (a - b).abs();
                (d > 0.0).then(|| floor_log2(d))
            })
            .collect();
        let levels = levels?;
        let top = *levels.iter().max()?;
        ConeIndex::new(levels.iter().map(|l| (top - l) as u32).collect())
    }

    fn kernel_sum(&self, f: &[f64], a: f64, keep: impl Fn(usize, usize) -> bool) -> Vec<f64> {
        let s = a / self.grid.dim() as f64 - 1.0;
        (0..self.len())
            .map(|x| {
                (0..self.len())
                    .filter(|&y| keep(x, y))
                    .map(|y| {
                        let v = self.volume(x, y);
                        if v > 0.0 {
                            f[y] * v.powf(s) * self.mass[y]
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    }

    /// Midpoint fractional integral with exponent `a`.
    pub fn i_alpha(&self, f: &[f64], a: f64) -> Vec<f64> {
        self.kernel_sum(f, a, |_, _| true)
    }

    /// Fractional integral restricted to the cone `t`.
    pub fn delta_t(&self, f: &[f64], a: f64, t: &ConeIndex) -> Vec<f64> {
        self.kernel_sum(f, a, |x, y| self.cone_of(x, y).as_ref() == Some(t))
    }

    /// `(mu(B), int_B f dmu)` for the index box `lo <= k < hi`.
    fn box_sums(&self, f: &[f64], lo: &[usize], hi: &[usize]) -> (f64, f64) {
        let (mut mu, mut fi) = (0.0, 0.0);
        for (k, (fk, mk)) in f.iter().zip(&self.mass).enumerate() {
            let m = self.grid.unravel(k);
            if m.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v < h) {
                mu += mk;
                fi += fk * mk;
            }
        }
        (mu, fi)
    }

    fn sup_over_boxes(&self, f: &[f64], s: f64, boxes: impl Fn(usize) -> Vec<(Vec<usize>, Vec<usize>)>) -> Vec<f64> {
        (0..self.len())
            .map(|x| {
                boxes(x)
                    .iter()
                    .map(|(lo, hi)| {
                        let (mu, fi) = self.box_sums(f, lo, hi);
                        if fi > 0.0 {
                            mu.powf(s) * fi
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// Sup of `mu(Q)^s int_Q f` over clipped index boxes centered at each cell.
    pub fn centered_maximal(&self, f: &[f64], s: f64) -> Vec<f64> {
        let counts = self.grid.counts();
        self.sup_over_boxes(f, s, |x| {
            let xm = self.grid.unravel(x);
            let radii = Grid::new(counts.iter().map(|&c| crate::grid::Axis::new(0.0, 1.0, c).unwrap()).collect())
                .expect("radius grid");
            (0..radii.len())
                .map(|k| {
                    let r = radii.unravel(k);
                    let lo = xm.iter().zip(&r).map(|(a, b)| a.saturating_sub(*b)).collect();
                    let hi = xm.iter().zip(&r).zip(&counts).map(|((a, b), c)| (a + b + 1).min(*c)).collect();
                    (lo, hi)
                })
                .collect()
        })
    }

    /// Sup over every index box containing the cell, centered or not.
    pub fn rectangle_maximal(&self, f: &[f64], s: f64) -> Vec<f64> {
        let counts = self.grid.counts();
        self.sup_over_boxes(f, s, |x| {
            let xm = self.grid.unravel(x);
            let per_axis: Vec<Vec<(usize, usize)>> = xm
                .iter()
                .zip(&counts)
                .map(|(&v, &c)| (0..=v).flat_map(|lo| (v + 1..=c).map(move |hi| (lo, hi))).collect())
                .collect();
            cartesian(&per_axis)
        })
    }

    /// Cell ranges of the clipped intervals of one shifted dyadic system on `axis`.
    fn dyadic_ranges(&self, axis: usize, shift: usize) -> Vec<(usize, usize)> {
        let a = self.grid.axis(axis);
        let len = a.hi - a.lo;
        let top = (a.count as f64).log2().ceil() as u32;
        let mut out = Vec::new();
        for k in 0..=top {
            let parts = 2f64.powi(k as i32);
            for m in -1..=(1i64 << k) {
                let lo = (a.lo + (m as f64 + SHIFTS[shift]) * len / parts).max(a.lo);
                let hi = (a.lo + (m as f64 + 1.0 + SHIFTS[shift]) * len / parts).min(a.hi);
                let cells: Vec<usize> = (0..a.count).filter(|&c| lo <= a.center(c) && a.center(c) < hi).collect();
                if lo < hi && !cells.is_empty() {
                    out.push((cells[0], cells[cells.len() - 1] + 1));
                }
            }
        }
        out
    }

    fn dyadic_boxes(&self, shift: &[usize]) -> Vec<Vec<(usize, usize)>> {
        (0..self.grid.dim()).map(|i| self.dyadic_ranges(i, shift[i])).collect()
    }

    /// Sup over the product intervals of one shifted system containing the cell.
    pub fn dyadic_maximal(&self, f: &[f64], s: f64, shift: &[usize]) -> Vec<f64> {
        let all = self.dyadic_boxes(shift);
        self.sup_over_boxes(f, s, |x| {
            let xm = self.grid.unravel(x);
            let per_axis: Vec<Vec<(usize, usize)>> = all
                .iter()
                .zip(&xm)
                .map(|(list, &v)| list.iter().copied().filter(|&(l, h)| l <= v && v < h).collect())
                .collect();
            cartesian(&per_axis)
        })
    }

    /// `(sum_Q mu(Q)^{r/p} avg_Q(f)^r)^{1/r}` over one shifted system.
    pub fn carleson(&self, f: &[f64], p: f64, r: f64, shift: &[usize]) -> f64 {
        let boxes = cartesian(&self.dyadic_boxes(shift));
        let total: f64 = boxes
            .iter()
            .map(|(lo, hi)| {
                let (mu, fi) = self.box_sums(f, lo, hi);
                if fi > 0.0 {
                    mu.powf(r / p) * (fi / mu).powf(r)
                } else {
                    0.0
                }
            })
            .sum();
        total.powf(1.0 / r)
    }

    /// Share of the `f^p` mass off the coordinate hyperplanes through each
    /// cell that lies in the cone `t`.
    pub fn theta(&self, f: &[f64], p: f64, t: &ConeIndex) -> Vec<f64> {
        (0..self.len())
            .map(|x| {
                let (mut inside, mut all) = (0.0, 0.0);
                for (y, (fy, my)) in f.iter().zip(&self.mass).enumerate() {
                    if let Some(c) = self.cone_of(x, y) {
                        let v = fy.powf(p) * my;
                        all += v;
                        if &c == t {
                            inside += v;
                        }
                    }
                }
                if all > 0.0 {
                    inside / all
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn lp_norm(&self, f: &[f64], p: f64) -> f64 {
        f.iter().zip(&self.mass).map(|(v, m)| v.powf(p) * m).sum::<f64>().powf(1.0 / p)
    }

    /// Largest ratio of a cone piece of the midpoint fractional integral to
    /// `theta^{(1/p)(1 - r/q)} (M_beta f)^{r/q} ||f||_p^{1 - r/q}`.
    pub fn hedberg_max_ratio(&self, f: &[f64], e: &ExponentSet) -> f64 {
        let split = e.r / e.q;
        let mbeta = self.centered_maximal(f, e.beta_exponent());
        let norm = self.lp_norm(f, e.p);
        let mut cones: Vec<ConeIndex> =
            (0..self.len()).flat_map(|x| (0..self.len()).filter_map(move |y| self.cone_of(x, y))).collect();
        cones.sort();
        cones.dedup();
        let mut best = 0.0f64;
        for t in &cones {
            let lhs = self.delta_t(f, e.alpha, t);
            let th = self.theta(f, e.p, t);
            for x in 0..self.len() {
                let rhs = th[x].powf((1.0 - split) / e.p) * mbeta[x].powf(split) * norm.powf(1.0 - split);
                if rhs > 0.0 {
                    best = best.max(lhs[x] / rhs);
                }
            }
        }
        best
    }
}

fn cartesian(per_axis: &[Vec<(usize, usize)>]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = vec![(Vec::new(), Vec::new())];
    for list in per_axis {
        out = out
            .into_iter()
            .flat_map(|(lo, hi)| {
                list.iter().map(move |&(l, h)| {
                    let (mut lo, mut hi) = (lo.clone(), hi.clone());
                    lo.push(l);
                    hi.push(h);
                    (lo, hi)
                })
            })
            .collect();
    }
    out
}

/// Deliberate bugs for checking that the suite catches mismatches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Evaluates the library's fractional integral at `1.01 alpha`.
    KernelExponent,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub checks: Vec<OracleCheck>,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let s = x.abs().max(y.abs());
            if s == 0.0 {
                0.0
            } else {
                (x - y).abs() / s
            }
        })
        .fold(0.0, f64::max)
}

pub const ORACLE_TOLERANCE: f64 = 1e-12;

/// Compares every fast operator with its oracle on 8x8 grids carrying a
/// random sampled weight and a random product power weight.
pub fn oracle_suite(seed: u64, fault: Option<Fault>) -> Result<OracleReport> {
    let mut rng = stream_rng(seed, u64::MAX);
    let grid = Grid::uniform(2, 0.0, 1.0, 8)?;
    let e = ExponentSet::new(2, 2.0, 4.0)?;
    let sampled = Weight::custom(&grid, (0..grid.len()).map(|_| rng.random_range(0.5..2.0)).collect())?;
    let power = Weight::from_kind(
        WeightKind::ProductPower { exponents: vec![rng.random_range(-0.5..1.0), rng.random_range(-0.5..1.0)] },
        &grid,
    )?;
    let f = GridFunction::new((0..grid.len()).map(|_| rng.random::<f64>()).collect())?;
    let fs = f.samples();
    let family = build_shifted_family(&grid);
    let alpha = match fault {
        Some(Fault::KernelExponent) => 1.01 * e.alpha,
        None => e.alpha,
    };

    let mut checks = Vec::new();
    let mut check = |name: String, err: f64| {
        checks.push(OracleCheck { name, max_rel_error: err, passed: err <= ORACLE_TOLERANCE });
    };
    for (wname, w) in [("sampled", &sampled), ("product_power", &power)] {
        let o = Oracle::new(&grid, w);
        let m = MeasureTable::new(&grid, w)?;

        let mut err = 0.0f64;
        for _ in 0..50 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-0.2..1.2)).collect();
            let d: Vec<f64> = (0..2).map(|_| rng.random_range(0.0..0.8)).collect();
            err = err.max(max_rel(&[m.rect_measure(&x, &d)], &[o.rect_measure(&x, &d)]));
        }
        check(format!("rect_measure/{wname}"), err);

        let mut fast_v = Vec::new();
        let mut slow_v = Vec::new();
        for x in 0..grid.len() {
            for y in 0..grid.len() {
                let (xm, ym) = (grid.unravel(x), grid.unravel(y));
                fast_v.push(crate::geometry::smallest_rect_volume_cells(&m, &xm, &ym));
                slow_v.push(o.volume(x, y));
            }
        }
        check(format!("volume/{wname}"), max_rel(&fast_v, &slow_v));

        let i = fractional_integral(&f, &m, alpha, KernelRule::Midpoint)?;
        check(format!("i_alpha/{wname}"), max_rel(i.samples(), &o.i_alpha(fs, e.alpha)));

        let mut err = 0.0f64;
        for t in crate::geometry::ConeLayout::new(&grid).cones() {
            let d = apply_delta_t(&f, &m, &e, t)?;
            err = err.max(max_rel(d.samples(), &o.delta_t(fs, e.alpha, t)));
        }
        check(format!("delta_t/{wname}"), err);

        let c = apply_m_alpha_centered(&f, &m, &e, false)?;
        check(format!("m_alpha_centered/{wname}"), max_rel(c.samples(), &o.centered_maximal(fs, e.kernel_exponent())));

        let mut err = 0.0f64;
        for id in 0..family.system_count() {
            let shift = family.shift_id(id);
            let d = apply_m_alpha_dyadic(&f, &m, &e, &family, &shift)?;
            err = err.max(max_rel(d.samples(), &o.dyadic_maximal(fs, e.kernel_exponent(), &shift)));
        }
        check(format!("m_alpha_dyadic/{wname}"), err);

        let mu = apply_m_mu(&f, &m)?;
        check(format!("m_mu/{wname}"), max_rel(mu.samples(), &o.centered_maximal(fs, -1.0)));

        let mut err = 0.0f64;
        for id in 0..family.system_count() {
            let shift = family.shift_id(id);
            let fast = carleson_sum(&f, &m, &e, &family, &shift, e.r)?;
            err = err.max(max_rel(&[fast], &[o.carleson(fs, e.p, e.r, &shift)]));
        }
        check(format!("carleson/{wname}"), err);

        let theta = compute_theta(&f, &m, &e)?;
        let mut err = 0.0f64;
        for t in theta.cones() {
            let fast = theta.field(t);
            let slow = o.theta(fs, e.p, t);
            // fractions live in [0, 1]; compare absolutely
            err = err.max(fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        check(format!("theta/{wname}"), err);
    }
    Ok(OracleReport { checks, tolerance: ORACLE_TOLERANCE })
}

/// Hedberg audit of a single-cell function on a 4x4 grid against the oracle.
pub fn hedberg_single_cell(cell: usize) -> Result<(f64, f64)> {
    let grid = Grid::uniform(2, 0.0, 1.0, 4)?;
    let e = ExponentSet::new(2, 2.0, 4.0)?;
    let m = MeasureTable::lebesgue(&grid);
    let f = GridFunction::delta(grid.len(), cell);
    let fast = hedberg_audit_with(&f, &m, &e, KernelRule::Midpoint, 0.0)?.max_ratio;
    let slow = Oracle::new(&grid, &Weight::lebesgue(&grid)).hedberg_max_ratio(f.samples(), &e);
    Ok((fast, slow))
}
