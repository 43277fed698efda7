use std::io::{BufRead, Write};

use super::space::{Axis, Grid};
use crate::error::{Error, Result};

/// Writes `count,lo,hi` for every axis on the first line, then one
/// `index,value` line per cell in lexicographic order.
pub fn write_grid_csv<W: Write>(mut out: W, grid: &Grid, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), found: values.len() });
    }
    let header: Vec<String> = grid.axes().iter().map(|a| format!("{},{:?},{:?}", a.count, a.lo, a.hi)).collect();
    writeln!(out, "{}", header.join(","))?;
    for (k, v) in values.iter().enumerate() {
        writeln!(out, "{k},{v:.16e}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_grid_csv<R: BufRead>(input: R) -> Result<(Grid, Vec<f64>)> {
    let mut lines = input.lines();
    let header = lines.next().ok_or(Error::Csv { line: 1, msg: "missing header".into() })??;
    let fields: Vec<&str> = header.trim_end_matches('\r').split(',').collect();
    if fields.is_empty() || !fields.len().is_multiple_of(3) {
        return Err(Error::Csv { line: 1, msg: "header needs count,lo,hi per axis".into() });
    }
    let bad = |msg: String| Error::Csv { line: 1, msg };
    let mut axes = Vec::new();
    for chunk in fields.chunks(3) {
        let count = chunk[0].trim().parse().map_err(|e| bad(format!("count: {e}")))?;
        let lo = chunk[1].trim().parse().map_err(|e| bad(format!("lo: {e}")))?;
        let hi = chunk[2].trim().parse().map_err(|e| bad(format!("hi: {e}")))?;
        axes.push(Axis::new(lo, hi, count)?);
    }
    let grid = Grid::new(axes)?;
    let mut values = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        let line = line?;
        let lineno = row + 2;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (idx, val) = line.split_once(',').ok_or(Error::Csv { line: lineno, msg: "expected index,value".into() })?;
        let idx: usize = idx.trim().parse().map_err(|e| Error::Csv { line: lineno, msg: format!("index: {e}") })?;
        if idx != values.len() {
            return Err(Error::Csv { line: lineno, msg: format!("expected index {}, found {idx}", values.len()) });
        }
        let val: f64 = val.trim().parse().map_err(|e| Error::Csv { line: lineno, msg: format!("value: {e}") })?;
        values.push(val);
    }
    if values.len() != grid.len() {
        return Err(Error::ShapeMismatch { expected: grid.len(), found: values.len() });
    }
    Ok((grid, values))
}
