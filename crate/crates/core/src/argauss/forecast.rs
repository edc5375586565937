use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::design::{design_row, Design};
use super::fit::ArxFit;
use super::spec::{ArxParams, ArxSpec};
use super::stationarity::{is_stationary, psi_weights};
use crate::error::{Error, Result};
use crate::frame::{Frame, Series};

/// One forecast step: plug-in conditional mean and innovation-accumulation sd.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastStep {
    pub year: i32,
    pub mean: f64,
    pub sd: f64,
}

/// What a forecast from the end of a frame needs: the last `k` observed
/// rows and the covariate rows of the forecast years. Evaluating at other
/// parameter values is cheap, which the focus gradients rely on.
#[derive(Debug, Clone)]
pub(crate) struct PredictionBasis {
    pub origin: i32,
    hist_z: Vec<f64>,
    hist_x: Vec<Vec<f64>>,
    future_x: Vec<Vec<f64>>,
}

impl PredictionBasis {
    /// Forecast origin is the last year with an observed response.
    pub fn new(
        spec: &ArxSpec,
        frame: &Frame,
        horizon: usize,
        future: Option<&Frame>,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidInput(
                "forecast horizon must be at least 1".into(),
            ));
        }
        let resp = frame.get(&spec.response)?;
        let origin =
            resp.observed().last().map(|(y, _)| y).ok_or_else(|| {
                Error::MissingValue(format!("{} has no observations", spec.response))
            })?;
        let k = spec.ar_order;
        let mut hist_z = Vec::with_capacity(k);
        let mut hist_x = Vec::with_capacity(k);
        for year in origin - k as i32 + 1..=origin {
            let z = resp
                .get(year)
                .ok_or_else(|| Error::MissingValue(format!("{} at {year}", spec.response)))?;
            hist_z.push(z);
            hist_x.push(strict_row(spec, frame, year)?);
        }
        let future_x = (1..=horizon as i32)
            .map(|j| design_row(spec, frame, future, origin + j))
            .collect::<Result<_>>()?;
        Ok(Self {
            origin,
            hist_z,
            hist_x,
            future_x,
        })
    }

    pub fn horizon(&self) -> usize {
        self.future_x.len()
    }

    pub fn means(&self, p: &ArxParams) -> Vec<f64> {
        let dot = |x: &[f64]| x.iter().zip(&p.beta).map(|(a, b)| a * b).sum::<f64>();
        // residual history, oldest first, extended by predicted residuals
        let mut eps: Vec<f64> = self
            .hist_z
            .iter()
            .zip(&self.hist_x)
            .map(|(z, x)| z - dot(x))
            .collect();
        let mut out = Vec::with_capacity(self.horizon());
        for x in &self.future_x {
            let n = eps.len();
            let e: f64 = p
                .rho
                .iter()
                .enumerate()
                .map(|(j, r)| r * eps[n - j - 1])
                .sum();
            eps.push(e);
            out.push(dot(x) + e);
        }
        out
    }

    /// Joint predictive covariance of the forecast years.
    pub fn covariance(&self, p: &ArxParams) -> DMatrix<f64> {
        let h = self.horizon();
        let psi = psi_weights(&p.rho, h);
        let s2 = p.sigma * p.sigma;
        DMatrix::from_fn(h, h, |i, j| {
            let m = i.min(j) + 1;
            s2 * (0..m).map(|l| psi[i - l] * psi[j - l]).sum::<f64>()
        })
    }

    pub fn sds(&self, p: &ArxParams) -> Vec<f64> {
        let psi = psi_weights(&p.rho, self.horizon());
        let mut acc = 0.0;
        psi.iter()
            .map(|w| {
                acc += w * w;
                p.sigma * acc.sqrt()
            })
            .collect()
    }
}

fn strict_row(spec: &ArxSpec, frame: &Frame, year: i32) -> Result<Vec<f64>> {
    for r in &spec.regressors {
        if frame.get(&r.name)?.get(year - r.lag as i32).is_none() {
            return Err(Error::MissingValue(format!(
                "{} at {}",
                r.name,
                year - r.lag as i32
            )));
        }
    }
    design_row(spec, frame, None, year)
}

/// `h`-step forecasts from the last observed year, holding covariates at
/// their last observed values beyond the data.
pub fn forecast(fit: &ArxFit, frame: &Frame, horizon: usize) -> Result<Vec<ForecastStep>> {
    forecast_with(fit, frame, horizon, None)
}

/// As [`forecast`], reading future covariate values from `future` first.
pub fn forecast_with(
    fit: &ArxFit,
    frame: &Frame,
    horizon: usize,
    future: Option<&Frame>,
) -> Result<Vec<ForecastStep>> {
    let basis = PredictionBasis::new(&fit.spec, frame, horizon, future)?;
    let p = fit.params();
    let means = basis.means(&p);
    let sds = basis.sds(&p);
    Ok(means
        .into_iter()
        .zip(sds)
        .enumerate()
        .map(|(j, (mean, sd))| ForecastStep {
            year: basis.origin + j as i32 + 1,
            mean,
            sd,
        })
        .collect())
}

/// Simulates `n` consecutive years from the fitted model, starting at the
/// frame's first year.
pub fn simulate(fit: &ArxFit, frame: &Frame, n: usize, seed: u64) -> Result<Series> {
    simulate_with(&fit.spec, &fit.params(), frame, n, seed)
}

/// Simulation from explicit parameters. The AR recursion starts at zero and
/// runs a burn-in of `10 k` steps before emission.
pub fn simulate_with(
    spec: &ArxSpec,
    params: &ArxParams,
    frame: &Frame,
    n: usize,
    seed: u64,
) -> Result<Series> {
    params.check(spec)?;
    if n == 0 {
        return Err(Error::InvalidInput("cannot simulate zero years".into()));
    }
    if !is_stationary(&params.rho) {
        return Err(Error::NonStationary(params.rho.clone()));
    }
    let start = frame.start_year();
    let means = (0..n)
        .map(|i| {
            let row = strict_row(spec, frame, start + i as i32)?;
            Ok(row
                .iter()
                .zip(&params.beta)
                .map(|(a, b)| a * b)
                .sum::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    let noise = ar_noise(&params.rho, params.sigma, n, seed);
    let vals = means.iter().zip(noise).map(|(m, e)| m + e).collect();
    Series::new(spec.response.clone(), start, vals)
}

/// Zero-mean AR noise with burn-in `10 k`.
pub(crate) fn ar_noise(rho: &[f64], sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let k = rho.len();
    let burn = 10 * k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eps = vec![0.0; k];
    eps.reserve(burn + n);
    for _ in 0..burn + n {
        let m = eps.len();
        let d: f64 = StandardNormal.sample(&mut rng);
        let e = rho
            .iter()
            .enumerate()
            .map(|(j, r)| r * eps[m - j - 1])
            .sum::<f64>()
            + sigma * d;
        eps.push(e);
    }
    eps.split_off(k + burn)
}

/// Standardized one-step innovations on the rows the fit used; other years masked.
pub fn residuals(fit: &ArxFit, frame: &Frame) -> Result<Series> {
    let d = Design::build(&fit.spec, frame, fit.alignment.as_ref())?;
    if d.n_eff() == 0 {
        return Err(Error::InvalidInput(format!(
            "no usable rows for {}",
            fit.spec
        )));
    }
    let u = d.innovations(&fit.beta, &fit.rho);
    let mut vals = vec![None; d.years.len()];
    for (&t, ui) in d.usable.iter().zip(u) {
        vals[t] = Some(ui / fit.sigma);
    }
    Series::from_options(fit.spec.response.clone(), frame.start_year(), &vals)
}
