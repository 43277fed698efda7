//! Strong fractional integrals, their cone restrictions, and strong
//! fractional maximal operators.

mod integral;
mod kernel;
mod maximal;
mod result;

pub use integral::{
    apply_delta_t, apply_i_alpha, apply_i_alpha_with, coincident_mass, cone_decomposition, cone_decomposition_with,
    fractional_integral,
    ConeDecomposition,
};
pub use kernel::{correction_factor, KernelRule};
pub use maximal::{
    apply_m_alpha_centered, apply_m_alpha_dyadic, apply_m_mu, centered_maximal, dyadic_maximal, shifted_dyadic_max,
};
pub use result::OperatorResult;
