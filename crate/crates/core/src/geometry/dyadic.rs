use crate::grid::Grid;

/// Offsets of the shifted dyadic systems, in units of the interval length.
pub const SHIFTS: [f64; 3] = [0.0, 1.0 / 3.0, 2.0 / 3.0];

/// An interval `lo + (m + s + [0, 1)) L 2^{-k}` clipped to its axis, with
/// the half-open range of cells whose centers it contains.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadicInterval {
    pub level: u32,
    pub lo: f64,
    pub hi: f64,
    pub first: usize,
    pub end: usize,
}

impl DyadicInterval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains_cells(&self, first: usize, end: usize) -> bool {
        self.first <= first && end <= self.end
    }
}

#[derive(Clone, Debug)]
struct System {
    intervals: Vec<DyadicInterval>,
    by_cell: Vec<Vec<usize>>,
}

/// Three shifted dyadic systems per axis; a product system is selected by
/// one shift number per axis, giving `3^n` product systems.
#[derive(Clone, Debug)]
pub struct ShiftedDyadicFamily {
    axes: Vec<[System; 3]>,
}

/// Builds the family down to the first level whose intervals are no longer
/// than a cell. Intervals that contain no cell center are dropped.
pub fn build_shifted_family(grid: &Grid) -> ShiftedDyadicFamily {
    let axes = grid
        .axes()
        .iter()
        .map(|a| {
            let levels = usize::BITS - (a.count - 1).leading_zeros();
            SHIFTS.map(|s| {
                let mut intervals = Vec::new();
                let mut by_cell = vec![Vec::new(); a.count];
                for k in 0..=levels {
                    let parts = 1i64 << k;
                    let len = a.length() / parts as f64;
                    let m0 = if s > 0.0 { -1 } else { 0 };
                    for m in m0..parts {
                        let lo = (a.lo + (m as f64 + s) * len).max(a.lo);
                        let hi = (a.lo + (m as f64 + 1.0 + s) * len).min(a.hi);
                        if lo >= hi {
                            continue;
                        }
                        let (first, end) = a.cells_in(lo, hi);
                        if first >= end {
                            continue;
                        }
                        for cell in by_cell.iter_mut().take(end).skip(first) {
                            cell.push(intervals.len());
                        }
                        intervals.push(DyadicInterval { level: k, lo, hi, first, end });
                    }
                }
                System { intervals, by_cell }
            })
        })
        .collect();
    ShiftedDyadicFamily { axes }
}

impl ShiftedDyadicFamily {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Number of product systems, `3^n`.
    pub fn system_count(&self) -> usize {
        3usize.pow(self.axes.len() as u32)
    }

    /// Per-axis shift numbers of product system `id` (first axis slowest).
    pub fn shift_id(&self, id: usize) -> Vec<usize> {
        let n = self.axes.len();
        let mut out = vec![0; n];
        let mut rem = id;
        for i in (0..n).rev() {
            out[i] = rem % 3;
            rem /= 3;
        }
        out
    }

    pub fn intervals(&self, axis: usize, shift: usize) -> &[DyadicInterval] {
        &self.axes[axis][shift].intervals
    }

    /// Ids of the intervals of one system that contain `cell`, coarse to fine.
    pub fn containing(&self, axis: usize, shift: usize, cell: usize) -> &[usize] {
        &self.axes[axis][shift].by_cell[cell]
    }

    /// Shortest family interval on `axis` containing the cells `first..end`.
    pub fn smallest_cover(&self, axis: usize, first: usize, end: usize) -> Option<&DyadicInterval> {
        self.axes[axis]
            .iter()
            .flat_map(|s| s.intervals.iter())
            .filter(|j| j.contains_cells(first, end))
            .min_by(|a, b| a.length().total_cmp(&b.length()))
    }
}
