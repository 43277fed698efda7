use super::cone::ConeIndex;
use crate::grid::MeasureTable;

/// Measure of the smallest closed rectangle centered at `x` containing `y`:
/// the cells with `|x_i - c_i| <= |x_i - y_i|` on every axis. Zero exactly
/// when `x` and `y` share a coordinate.
pub fn smallest_rect_volume(m: &MeasureTable, x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - b).abs()).collect();
    if d.contains(&0.0) {
        return 0.0;
    }
    m.closed_rect_measure(x, &d)
}

/// [`smallest_rect_volume`] between two cell centers, by index arithmetic.
pub fn smallest_rect_volume_cells(m: &MeasureTable, x: &[usize], y: &[usize]) -> f64 {
    let radius: Vec<usize> = x.iter().zip(y).map(|(a, b)| a.abs_diff(*b)).collect();
    if radius.contains(&0) {
        return 0.0;
    }
    m.index_box(x, &radius)
}

/// Measures of the closed rectangles at `x` with half-widths `2^{j - t_i}`
/// and `2^{j + 1 - t_i}`, which bracket the rectangle volume of any cell in
/// the level-`j` shell of the cone `t`.
pub fn cone_shell_bounds(m: &MeasureTable, x: &[f64], t: &ConeIndex, j: i64) -> (f64, f64) {
    let inner: Vec<f64> = t.as_slice().iter().map(|&ti| 2f64.powi((j - ti as i64) as i32)).collect();
    let outer: Vec<f64> = inner.iter().map(|v| 2.0 * v).collect();
    (m.closed_rect_measure(x, &inner), m.closed_rect_measure(x, &outer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn degenerate_and_lebesgue() {
        let g = Grid::uniform(2, -2.0, 2.0, 64).unwrap();
        let m = MeasureTable::lebesgue(&g);
        let x = g.center(g.index(&[30, 33]));
        assert_eq!(smallest_rect_volume(&m, &x, &x), 0.0);
        let y = g.center(g.index(&[38, 29]));
        let (a, b) = ((x[0] - y[0]).abs(), (x[1] - y[1]).abs());
        let v = smallest_rect_volume(&m, &x, &y);
        assert!((v - 4.0 * a * b).abs() < 4.0 * g.max_spacing());
        let vc = smallest_rect_volume_cells(&m, &[30, 33], &[38, 29]);
        assert!((v - vc).abs() < 1e-14);
        assert_eq!(smallest_rect_volume_cells(&m, &[30, 33], &[30, 2]), 0.0);
    }
}
