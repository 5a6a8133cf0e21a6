//! Flows, intrinsic distance, heat kernel and `L_p` semigroup diagnostics for
//! the one-dimensional operator `H = -ρ⁻¹ (a ρ a u')'` on `L_p(ℝ, ρ dx)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(feature = "cli")]
pub mod cli;
pub mod coefficients;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod kernel;
pub mod metric_volume;
pub mod numerics;
pub mod operators;
pub mod report;

pub use error::{Error, Result};
