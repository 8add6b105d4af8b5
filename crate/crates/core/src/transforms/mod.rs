//! Affine slices, their Hessian pullbacks, and the discrete partial
//! Legendre transform in time.

mod convexity;
mod grid;
mod legendre;
mod slice;

pub use convexity::{
    discrete_convexity_report, discrete_hessian, min_eig_2x2, min_lattice_second_diff,
    ConvexityReport, SliceSecondDifference, LATTICE_DIRECTIONS,
};
pub use grid::{uniform_grid, GridFunction1D, GridFunction2D};
pub use legendre::{legendre_down, legendre_up, tau_grid, time_lipschitz};
pub use slice::{
    hessian_pullback_check, pullback_slice, shear_conjugate, AffineSlice, SpaceTimeFunction,
};
