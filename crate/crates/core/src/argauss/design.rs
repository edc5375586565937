use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::spec::{ArxParams, ArxSpec, Regressor, TREND_ORIGIN};
use crate::error::{Error, Result};
use crate::frame::Frame;

/// Forces several fits onto a common sample: rows must also have the listed
/// regressors observed, and the first `ar_order` rows of every complete run
/// are used for conditioning only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowAlignment {
    pub ar_order: usize,
    pub regressors: Vec<Regressor>,
}

impl RowAlignment {
    /// Smallest alignment covering every spec in `specs`.
    pub fn covering<'a>(specs: impl IntoIterator<Item = &'a ArxSpec>) -> Self {
        let mut out = RowAlignment::default();
        for s in specs {
            out.ar_order = out.ar_order.max(s.ar_order);
            for r in &s.regressors {
                if !out.regressors.contains(r) {
                    out.regressors.push(r.clone());
                }
            }
        }
        out
    }
}

/// Covariate vector x_t for `spec` at `year`.
///
/// Regressor values are looked up in `future` first, then `frame`; years
/// beyond the last observation of a covariate reuse its last observed value.
pub(crate) fn design_row(
    spec: &ArxSpec,
    frame: &Frame,
    future: Option<&Frame>,
    year: i32,
) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(spec.n_beta());
    if spec.include_intercept {
        row.push(1.0);
    }
    if spec.include_linear_trend {
        row.push((year - TREND_ORIGIN) as f64);
    }
    for r in &spec.regressors {
        row.push(covariate_value(
            frame,
            future,
            &r.name,
            year - r.lag as i32,
        )?);
    }
    Ok(row)
}

fn covariate_value(frame: &Frame, future: Option<&Frame>, name: &str, year: i32) -> Result<f64> {
    if let Some(v) = future
        .and_then(|f| f.get(name).ok())
        .and_then(|s| s.get(year))
    {
        return Ok(v);
    }
    let s = frame.get(name)?;
    if let Some(v) = s.get(year) {
        return Ok(v);
    }
    let last = s.observed().last();
    match last {
        Some((ly, v)) if year > ly => Ok(v),
        _ => Err(Error::MissingValue(format!("{name} at {year}"))),
    }
}

/// Response and covariates laid out on the frame's rows.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub years: Vec<i32>,
    pub z: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    /// Rows entering the conditional likelihood.
    pub usable: Vec<usize>,
    pub k: usize,
    pub m: usize,
}

impl Design {
    pub fn build(spec: &ArxSpec, frame: &Frame, align: Option<&RowAlignment>) -> Result<Self> {
        spec.validate()?;
        let resp = frame.get(&spec.response)?;
        for r in &spec.regressors {
            frame.get(&r.name)?;
        }
        let years: Vec<i32> = frame.years().collect();
        let n = years.len();
        let m = spec.n_beta();
        let mut z = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        let mut complete = Vec::with_capacity(n);
        for (i, &year) in years.iter().enumerate() {
            let zi = resp.at(i);
            let mut row = Vec::with_capacity(m);
            let mut ok = zi.is_some();
            if spec.include_intercept {
                row.push(1.0);
            }
            if spec.include_linear_trend {
                row.push((year - TREND_ORIGIN) as f64);
            }
            for r in &spec.regressors {
                let v = frame.get(&r.name)?.get(year - r.lag as i32);
                ok &= v.is_some();
                row.push(v.unwrap_or(f64::NAN));
            }
            if let Some(a) = align {
                for r in &a.regressors {
                    if let Ok(s) = frame.get(&r.name) {
                        ok &= s.get(year - r.lag as i32).is_some();
                    }
                }
            }
            z.push(zi.unwrap_or(f64::NAN));
            x.push(row);
            complete.push(ok);
        }
        let k = spec.ar_order;
        let cond = align.map_or(k, |a| a.ar_order.max(k));
        let usable = (cond..n)
            .filter(|&t| complete[t - cond..=t].iter().all(|&c| c))
            .collect();
        Ok(Self {
            years,
            z,
            x,
            usable,
            k,
            m,
        })
    }

    pub fn n_eff(&self) -> usize {
        self.usable.len()
    }

    /// Regression residual z_t - x_t' beta.
    #[inline]
    pub fn resid(&self, t: usize, beta: &[f64]) -> f64 {
        self.z[t] - self.x[t].iter().zip(beta).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Innovation u_t = e_t - sum_j rho_j e_{t-j} on each usable row.
    pub fn innovations(&self, beta: &[f64], rho: &[f64]) -> Vec<f64> {
        self.usable
            .iter()
            .map(|&t| {
                let mut u = self.resid(t, beta);
                for (j, r) in rho.iter().enumerate() {
                    u -= r * self.resid(t - j - 1, beta);
                }
                u
            })
            .collect()
    }

    /// Per-row log-likelihood contributions.
    pub fn contributions(&self, p: &ArxParams) -> Vec<f64> {
        let c = -0.5 * (2.0 * PI).ln() - p.sigma.ln();
        let s2 = p.sigma * p.sigma;
        self.innovations(&p.beta, &p.rho)
            .into_iter()
            .map(|u| c - u * u / (2.0 * s2))
            .collect()
    }

    pub fn loglik(&self, p: &ArxParams) -> f64 {
        self.contributions(p).iter().sum()
    }
}
