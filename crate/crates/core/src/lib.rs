//! SNR loss and Kelly GLRT statistics of adaptive matched filters trained on
//! complex matrix-variate t samples.
//!
//! Two computation paths are provided: a direct path that simulates the
//! training and test data and evaluates the filters ([`adaptive`]), and
//! chi-square stochastic representations of the same statistics
//! ([`represent`]). Closed-form densities and means live in [`analytic`];
//! [`experiments`] runs the Monte Carlo comparisons and figure grids.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod analytic;
pub mod error;
pub mod experiments;
pub mod matvar;
pub mod randvar;
pub mod represent;

pub use error::{Error, Result};
pub use randvar::RngStream;
