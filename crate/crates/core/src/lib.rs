//! Time-series engine for annual liver-quality indices and their covariates.
//!
//! * [`frame`]: annual series with missing-value masks, CSV I/O.
//! * [`argauss`]: Gaussian regression with AR errors, conditional MLE.
//! * [`modelsel`]: AIC, BIC, score races and the focused information criterion.
//! * [`monitor`]: prediction monitoring, likelihood bridges, rolling sd, ADF.
//! * [`confid`]: confidence distributions, curves and their combination.
//! * [`hsicopula`]: bulk and per-fish indices, gamma-margin Gaussian copula.
//! * [`tvar`]: time-varying autoregressions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod argauss;
pub mod confid;
pub mod dist;
pub mod error;
pub mod frame;
pub mod hsicopula;
pub mod modelsel;
pub mod monitor;
pub mod tvar;

pub use argauss::{ArxFit, ArxParams, ArxSpec, FitOptions, Regressor};
pub use error::{Error, Result};
pub use frame::{Frame, Series};
