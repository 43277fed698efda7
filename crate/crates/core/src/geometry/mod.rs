//! Rectangle volumes, exponent bookkeeping, dyadic cones and shifted dyadic
//! interval families.

mod cone;
mod dyadic;
mod exponents;
mod volume;

pub use cone::{
    classify, cone_level, cone_partition_check, dyadic_floor, ConeIndex, ConeLayout, BREAKPOINT_SNAP,
};
pub use dyadic::{build_shifted_family, DyadicInterval, ShiftedDyadicFamily, SHIFTS};
pub use exponents::ExponentSet;
pub use volume::{cone_shell_bounds, smallest_rect_volume, smallest_rect_volume_cells};
