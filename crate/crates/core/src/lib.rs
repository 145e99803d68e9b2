//! Monte Carlo simulation and diagnostics for the periodic one-dimensional
//! stochastic wave equation with bounded multiplicative noise and a singular
//! drift `u^{-alpha}`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circle_kernel;
pub mod error;
pub mod girsanov;
pub mod grid;
pub mod harness;
pub mod noise;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Field2, FieldHistory, GridSpec};
