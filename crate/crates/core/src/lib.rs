//! Discrete testbed for fractional integration on product spaces.
//!
//! The crate discretizes a box in `R^n` into a tensor grid carrying a
//! weighted measure `w dx`, and evaluates on it the multi-parameter
//! fractional integral whose kernel is a power of the measure of the
//! smallest axis-parallel rectangle centered at `x` containing `y`, its
//! restrictions to dyadic cones, several strong fractional maximal
//! operators, and the quantities used to study their mapping properties.
//!
//! Layout:
//! - [`grid`]: grids, weights, measure tables, doubling estimates.
//! - [`geometry`]: exponents, rectangle volumes, cones, shifted dyadic families.
//! - [`operators`]: integral and maximal operators.
//! - [`analysis`]: cone mass fractions, thresholds, pointwise audits, Carleson
//!   sums and the cone cross-term functional.
//! - [`experiments`]: seeded end-to-end experiments and report emission.
//! - [`oracle`]: slow direct-summation reference implementations.

// `!(x <= tol)` deliberately treats NaN as a failure
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod geometry;
pub mod grid;
pub mod operators;
pub mod analysis;
pub mod experiments;
pub mod oracle;

pub use error::{Error, Result};
