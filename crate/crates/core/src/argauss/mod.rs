//! Gaussian regression with autoregressive errors.
//!
//! Models have the form `z_t = x_t' beta + eps_t` with AR(k) errors
//! `eps_t = rho_1 eps_{t-1} + ... + rho_k eps_{t-k} + sigma delta_t`, where
//! `x_t` collects an intercept, a linear trend in `year - 1980`, and lagged
//! covariates. Fitting maximizes the likelihood conditional on the first `k`
//! rows of the sample: for fixed `rho` the coefficients and `sigma` have
//! closed forms, so only the AR coefficients are optimized numerically.

mod design;
mod fit;
mod forecast;
mod spec;
mod stationarity;

pub use design::RowAlignment;
pub use fit::{fit, fit_with, loglik, loglik_aligned, loglik_contributions, ArxFit, FitOptions};
pub use forecast::{forecast, forecast_with, residuals, simulate, simulate_with, ForecastStep};
pub use spec::{ArxParams, ArxSpec, Regressor, MAX_AR_ORDER, TREND_ORIGIN};
pub use stationarity::{ar_autocovariance, is_stationary, psi_weights, yule_walker, ROOT_MARGIN};

pub(crate) use design::design_row;
pub(crate) use fit::exact_fit;
pub(crate) use forecast::PredictionBasis;
