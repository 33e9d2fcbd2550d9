//! Approximately similar one-sided tests built from a critical value
//! function (CVF): the test rejects when a statistic exceeds a linear
//! combination of null density ratios whose weights are calibrated by
//! linear programming on Monte Carlo draws.
//!
//! The crate is organised bottom-up:
//!
//! - [`lp`]: bounded-variable simplex returning primal vertex and row duals.
//! - [`model`]: the predictive regression with a persistent AR(1) regressor,
//!   its invariant likelihood and the local quadratic expansion.
//! - [`cvf`]: calibration, evaluation and grid refinement of the CVF.
//! - [`baseline`]: normal-quantile, bootstrap and subsampling comparisons.
//! - [`limit`]: Brownian and Ornstein–Uhlenbeck functionals of the local
//!   limit experiments, used to validate finite-sample statistics.

pub mod baseline;
pub mod cvf;
pub mod error;
pub mod limit;
pub mod lp;
pub mod model;
pub mod seed;

mod normal;

pub use error::{Error, Result};
pub use normal::{normal_cdf, normal_quantile};
