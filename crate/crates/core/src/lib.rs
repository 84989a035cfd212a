//! Numerical laboratory for correlated stochastic volatility models
//! (Vasicek, Heston, exponential Ornstein-Uhlenbeck).
//!
//! - [`model`]: model coefficients and the log-return/price relation
//! - [`simulate`]: seeded, parallel Euler-Maruyama path ensembles
//! - [`analytic`]: stationary laws, leverage and autocorrelation curves
//! - [`estimators`]: densities, correlation curves, characteristic functions
//! - [`calibrate`]: volatility proxy and maximum-likelihood fits
//! - [`optim`]: Nelder–Mead minimizer

// `!(x > 0.0)` is used on purpose so NaN is rejected with the bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod calibrate;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod model;
pub mod optim;
pub mod simulate;
pub mod stats;
pub mod textfmt;

pub use diagnostics::Warning;
pub use error::{Error, Result};
pub use model::{ModelKind, ModelParams};
