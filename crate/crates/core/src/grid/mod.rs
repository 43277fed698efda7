//! Discretization of the product space: tensor grids, weights, grid
//! functions, prefix-sum measure tables and doubling-constant estimates.

mod csv;
mod doubling;
mod function;
mod measure;
mod space;
mod weight;

pub use csv::{read_grid_csv, write_grid_csv};
pub use doubling::{estimate_doubling, DoublingReport, ScaleStats, DOUBLING_GROWTH_TOLERANCE};
pub use function::GridFunction;
pub use measure::{integrate, lp_norm, MeasureTable, PrefixTable};
pub use space::{Axis, Grid};
pub use weight::{Weight, WeightKind};
