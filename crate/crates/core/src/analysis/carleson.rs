use crate::error::{Error, Result};
use crate::geometry::{ExponentSet, ShiftedDyadicFamily};
use crate::grid::{GridFunction, MeasureTable, PrefixTable};

/// `(sum_Q mu(Q)^{s/p} (mu(Q)^{-1} int_Q f dmu)^s)^{1/s}` over all product
/// rectangles of one shifted dyadic system, with `s = r_exp > p`.
pub fn carleson_sum(
    f: &GridFunction,
    m: &MeasureTable,
    e: &ExponentSet,
    family: &ShiftedDyadicFamily,
    shift: &[usize],
    r_exp: f64,
) -> Result<f64> {
    if !(r_exp > e.p && r_exp.is_finite()) {
        return Err(Error::InvalidArgument(format!("summation exponent {r_exp} must exceed p = {}", e.p)));
    }
    if f.len() != m.len() {
        return Err(Error::ShapeMismatch { expected: m.len(), found: f.len() });
    }
    let n = m.dim();
    if family.dim() != n || shift.len() != n || shift.iter().any(|&v| v > 2) {
        return Err(Error::InvalidArgument(format!("shift id {shift:?} does not select a system")));
    }
    let fm: Vec<f64> = f.samples().iter().zip(m.cell_mass()).map(|(a, b)| a * b).collect();
    let fp = PrefixTable::new(&m.grid().counts(), &fm);
    let lists: Vec<_> = (0..n).map(|i| family.intervals(i, shift[i])).collect();
    let mut pick = vec![0usize; n];
    let (mut lo, mut hi) = (vec![0usize; n], vec![0usize; n]);
    let mut acc = 0.0;
    loop {
        for i in 0..n {
            let iv = &lists[i][pick[i]];
            (lo[i], hi[i]) = (iv.first, iv.end);
        }
        let fv = fp.box_sum(&lo, &hi);
        if fv > 0.0 {
            let mu = m.box_measure(&lo, &hi);
            acc += mu.powf(r_exp / e.p) * (fv / mu).powf(r_exp);
        }
        let mut i = n;
        while i > 0 {
            i -= 1;
            pick[i] += 1;
            if pick[i] < lists[i].len() {
                break;
            }
            pick[i] = 0;
            if i == 0 {
                return Ok(acc.powf(1.0 / r_exp));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_shifted_family;
    use crate::grid::Grid;

    #[test]
    fn zero_and_argument_checks() {
        let g = Grid::uniform(2, 0.0, 1.0, 8).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let fam = build_shifted_family(&g);
        let e = ExponentSet::new(2, 2.0, 4.0).unwrap();
        assert_eq!(carleson_sum(&GridFunction::zeros(64), &m, &e, &fam, &[0, 0], e.r).unwrap(), 0.0);
        assert!(carleson_sum(&GridFunction::zeros(64), &m, &e, &fam, &[0, 0], 2.0).is_err());
        let f = GridFunction::constant(64, 1.0).unwrap();
        let s = carleson_sum(&f, &m, &e, &fam, &[1, 2], e.r).unwrap();
        assert!(s > 0.0 && s.is_finite());
    }
}
