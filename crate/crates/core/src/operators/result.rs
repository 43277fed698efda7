use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::ExponentSet;
use crate::grid::{write_grid_csv, Grid, GridFunction};

/// Output samples of an operator with the bookkeeping of the evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorResult {
    pub values: GridFunction,
    /// Largest, over output cells, mass of the input cells that were skipped
    /// because they share a coordinate with the output cell.
    pub skipped_mass: f64,
    /// `None` for operators evaluated at a free exponent.
    pub exponents: Option<ExponentSet>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    exponents: &'a Option<ExponentSet>,
    skipped_mass: f64,
}

impl OperatorResult {
    pub fn samples(&self) -> &[f64] {
        self.values.samples()
    }

    /// Writes the values as grid CSV and the metadata as a JSON sidecar.
    pub fn write(&self, grid: &Grid, csv_path: &Path, json_path: &Path) -> Result<()> {
        write_grid_csv(BufWriter::new(File::create(csv_path)?), grid, self.values.samples())?;
        let side = Sidecar { exponents: &self.exponents, skipped_mass: self.skipped_mass };
        let mut text = serde_json::to_string_pretty(&side)?;
        text.push('\n');
        std::fs::write(json_path, text)?;
        Ok(())
    }
}
