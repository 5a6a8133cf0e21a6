//! Quadrature, monotone inversion, grid functions and smooth test functions.

mod grid;
pub mod parallel;
pub mod profiles;
mod quadrature;
mod roots;
mod test_function;

pub use grid::{lp_norm, GridFunction, LpExponent, Window, DEFAULT_POINTS_PER_UNIT};
pub use quadrature::{
    gauss_legendre, integrate, integrate_detailed, integrate_with_breaks, QuadValue,
    QuadratureConfig, QuadratureResult,
};
pub use roots::{invert_monotone, invert_monotone_newton};
pub use test_function::TestFunction;
