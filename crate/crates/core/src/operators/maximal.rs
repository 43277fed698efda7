use super::result::OperatorResult;
use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{ExponentSet, ShiftedDyadicFamily};
use crate::grid::{GridFunction, MeasureTable, PrefixTable};

fn f_prefix(f: &GridFunction, m: &MeasureTable) -> Result<PrefixTable> {
    if f.len() != m.len() {
        return Err(Error::ShapeMismatch { expected: m.len(), found: f.len() });
    }
    let fm: Vec<f64> = f.samples().iter().zip(m.cell_mass()).map(|(a, b)| a * b).collect();
    Ok(PrefixTable::new(&m.grid().counts(), &fm))
}

/// `sup mu(Q)^s int_Q f dmu` over the open rectangles centered at each cell
/// with half-widths `k h_i`, `1 <= k <= count_i`, clipped to the domain.
///
/// A half-width `k h` admits the cells at index offsets below `k`, so the
/// sup runs over clipped index boxes of radius `0..count - 1`; radii beyond
/// the farther domain edge repeat an earlier box and are not visited.
pub fn centered_maximal(f: &GridFunction, m: &MeasureTable, s: f64) -> Result<Vec<f64>> {
    let fp = f_prefix(f, m)?;
    let grid = m.grid();
    let n = grid.dim();
    let counts = grid.counts();
    let last = n - 1;
    let cl = counts[last];
    // per-axis tables mu_i(box of radius r around x_i)^s
    let pow_tables: Option<Vec<Vec<f64>>> = m.is_product().then(|| {
        (0..n)
            .map(|i| {
                let mass = m.axis_mass(i).unwrap();
                let c = counts[i];
                let mut pre = vec![0.0; c + 1];
                for k in 0..c {
                    pre[k + 1] = pre[k] + mass[k];
                }
                let mut t = vec![0.0; c * c];
                for x in 0..c {
                    for r in 0..c {
                        t[x * c + r] = (pre[(x + r + 1).min(c)] - pre[x.saturating_sub(r)]).powf(s);
                    }
                }
                t
            })
            .collect()
    });
    let mp = m.prefix();
    let values = exec::map_range(grid.len(), |x| {
        let xm = grid.unravel(x);
        let rmax: Vec<usize> = xm.iter().zip(&counts).map(|(&k, &c)| k.max(c - 1 - k)).collect();
        let mut radius = vec![0usize; last];
        let mut corner = vec![0usize; last];
        let mut df = vec![0.0; cl + 1];
        let mut dm = vec![0.0; cl + 1];
        let mut best = 0.0f64;
        loop {
            // collapse the outer box onto the last axis
            df.iter_mut().for_each(|v| *v = 0.0);
            dm.iter_mut().for_each(|v| *v = 0.0);
            let mut outer_pow = 1.0;
            for mask in 0..(1usize << last) {
                let mut lows = 0;
                for i in 0..last {
                    corner[i] = if mask >> i & 1 == 1 {
                        (xm[i] + radius[i] + 1).min(counts[i])
                    } else {
                        lows += 1;
                        xm[i].saturating_sub(radius[i])
                    };
                }
                let sign = if lows % 2 == 0 { 1.0 } else { -1.0 };
                for (d, v) in df.iter_mut().zip(fp.last_axis_line(&corner)) {
                    *d += sign * v;
                }
                if pow_tables.is_none() {
                    for (d, v) in dm.iter_mut().zip(mp.last_axis_line(&corner)) {
                        *d += sign * v;
                    }
                }
            }
            if let Some(t) = &pow_tables {
                for i in 0..last {
                    outer_pow *= t[i][xm[i] * counts[i] + radius[i]];
                }
            }
            let k = xm[last];
            for r in 0..=rmax[last] {
                let (lo, hi) = (k.saturating_sub(r), (k + r + 1).min(cl));
                let fv = df[hi] - df[lo];
                if fv <= 0.0 {
                    continue;
                }
                let mu_s = match &pow_tables {
                    Some(t) => outer_pow * t[last][k * cl + r],
                    None => (dm[hi] - dm[lo]).powf(s),
                };
                best = best.max(mu_s * fv);
            }
            // advance the outer radii
            let mut i = 0;
            while i < last {
                radius[i] += 1;
                if radius[i] <= rmax[i] {
                    break;
                }
                radius[i] = 0;
                i += 1;
            }
            if i == last {
                break;
            }
        }
        best
    });
    Ok(values)
}

fn check_dim(m: &MeasureTable, e: &ExponentSet) -> Result<()> {
    if e.n != m.dim() {
        return Err(Error::InvalidExponents(format!("exponents for n = {} on a {}-dimensional grid", e.n, m.dim())));
    }
    Ok(())
}

/// Centered strong fractional maximal function with exponent `alpha`, or
/// `beta` when `which_beta` is set.
pub fn apply_m_alpha_centered(f: &GridFunction, m: &MeasureTable, e: &ExponentSet, which_beta: bool) -> Result<OperatorResult> {
    check_dim(m, e)?;
    let s = if which_beta { e.beta_exponent() } else { e.kernel_exponent() };
    Ok(OperatorResult {
        values: GridFunction::new(centered_maximal(f, m, s)?)?,
        skipped_mass: 0.0,
        exponents: Some(*e),
    })
}

/// Centered strong maximal function (averages).
pub fn apply_m_mu(f: &GridFunction, m: &MeasureTable) -> Result<OperatorResult> {
    Ok(OperatorResult {
        values: GridFunction::new(centered_maximal(f, m, -1.0)?)?,
        skipped_mass: 0.0,
        exponents: None,
    })
}

/// `sup mu(Q)^s int_Q f dmu` over the product rectangles of one shifted
/// dyadic system that contain each cell.
pub fn dyadic_maximal(
    f: &GridFunction,
    m: &MeasureTable,
    s: f64,
    family: &ShiftedDyadicFamily,
    shift: &[usize],
) -> Result<Vec<f64>> {
    let fp = f_prefix(f, m)?;
    let grid = m.grid();
    let n = grid.dim();
    if family.dim() != n || shift.len() != n || shift.iter().any(|&v| v > 2) {
        return Err(Error::InvalidArgument(format!("shift id {shift:?} does not select a system")));
    }
    Ok(exec::map_range(grid.len(), |x| {
        let xm = grid.unravel(x);
        let lists: Vec<&[usize]> = (0..n).map(|i| family.containing(i, shift[i], xm[i])).collect();
        let mut pick = vec![0usize; n];
        let (mut lo, mut hi) = (vec![0usize; n], vec![0usize; n]);
        let mut best = 0.0f64;
        loop {
            for i in 0..n {
                let iv = &family.intervals(i, shift[i])[lists[i][pick[i]]];
                (lo[i], hi[i]) = (iv.first, iv.end);
            }
            let fv = fp.box_sum(&lo, &hi);
            if fv > 0.0 {
                best = best.max(m.box_measure(&lo, &hi).powf(s) * fv);
            }
            let mut i = 0;
            while i < n {
                pick[i] += 1;
                if pick[i] < lists[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        best
    }))
}

pub fn apply_m_alpha_dyadic(
    f: &GridFunction,
    m: &MeasureTable,
    e: &ExponentSet,
    family: &ShiftedDyadicFamily,
    shift: &[usize],
) -> Result<OperatorResult> {
    check_dim(m, e)?;
    Ok(OperatorResult {
        values: GridFunction::new(dyadic_maximal(f, m, e.kernel_exponent(), family, shift)?)?,
        skipped_mass: 0.0,
        exponents: Some(*e),
    })
}

/// Pointwise maximum of the dyadic maximal functions over all shifted systems.
pub fn shifted_dyadic_max(f: &GridFunction, m: &MeasureTable, s: f64, family: &ShiftedDyadicFamily) -> Result<Vec<f64>> {
    let mut out = vec![0.0f64; m.len()];
    for id in 0..family.system_count() {
        let v = dyadic_maximal(f, m, s, family, &family.shift_id(id))?;
        for (o, x) in out.iter_mut().zip(v) {
            *o = o.max(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_shifted_family;
    use crate::grid::{Grid, Weight, WeightKind};

    #[test]
    fn constant_averages() {
        let g = Grid::uniform(2, -1.0, 1.0, 8).unwrap();
        let w = Weight::from_kind(WeightKind::ProductPower { exponents: vec![1.0, 2.0] }, &g).unwrap();
        let m = MeasureTable::new(&g, &w).unwrap();
        let f = GridFunction::constant(64, 2.5).unwrap();
        for v in apply_m_mu(&f, &m).unwrap().samples() {
            assert!((v - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn constant_alpha_is_largest_box() {
        let g = Grid::uniform(2, 0.0, 1.0, 8).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let e = ExponentSet::new(2, 2.0, 4.0).unwrap();
        let f = GridFunction::constant(64, 1.0).unwrap();
        let r = apply_m_alpha_centered(&f, &m, &e, false).unwrap();
        for v in r.samples() {
            assert!((v - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn product_and_general_agree() {
        let g = Grid::new(vec![
            crate::grid::Axis::new(-1.0, 1.0, 6).unwrap(),
            crate::grid::Axis::new(-1.0, 1.0, 8).unwrap(),
            crate::grid::Axis::new(0.0, 1.0, 5).unwrap(),
        ])
        .unwrap();
        let w = Weight::from_kind(WeightKind::ProductPower { exponents: vec![1.0, -0.5, 0.0] }, &g).unwrap();
        let mp = MeasureTable::new(&g, &w).unwrap();
        let mg = MeasureTable::new(&g, &Weight::custom(&g, w.samples().to_vec()).unwrap()).unwrap();
        let f = GridFunction::from_fn(&g, |x| (x[0] + 2.0 * x[1] + x[2]).cos().abs()).unwrap();
        let a = centered_maximal(&f, &mp, -0.3).unwrap();
        let b = centered_maximal(&f, &mg, -0.3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * y);
        }
    }

    #[test]
    fn dyadic_single_cell_average() {
        let g = Grid::uniform(2, 0.0, 1.0, 8).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let fam = build_shifted_family(&g);
        let f = GridFunction::delta(64, 27);
        let d = dyadic_maximal(&f, &m, -1.0, &fam, &[0, 0]).unwrap();
        // at the support, the single cell is a dyadic rectangle
        assert!((d[27] - 1.0).abs() < 1e-12);
        assert!(d.iter().all(|&v| v <= 1.0 + 1e-12));
        assert!(dyadic_maximal(&f, &m, -1.0, &fam, &[0, 3]).is_err());
    }
}
