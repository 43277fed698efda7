//! Quantities built on the cone decomposition: cone mass fractions, the
//! implicit splitting scale, the pointwise Hedberg audit, dyadic Carleson
//! sums, and the cone cross-term functional with its decay fit.

mod carleson;
mod fit;
mod hedberg;
mod ortho;
mod tau;
mod theta;

pub use carleson::carleson_sum;
pub use fit::{linear_fit, LinearFit};
pub use hedberg::{hedberg_audit, hedberg_audit_with, HedbergReport, LevelProfile};
pub use ortho::{ortho_functional, OrthoContext, OrthoRecord, OrthoSweep};
pub use tau::{solve_tau, solve_tau_field, tau_lebesgue, TauField};
pub use theta::{compute_theta, ThetaField};
