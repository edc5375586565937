//! Time-varying autoregressions on rescaled time `u = t / n`.
//!
//! The process is `Y_t + α_1(u) Y_{t-1} + ... + α_p(u) Y_{t-p} = σ(u) ε_t`,
//! so a frozen-coefficient AR coefficient is `ρ_j = -α_j`.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::argauss::is_stationary;
use crate::error::{Error, Result};
use crate::frame::{write_csv_to, Frame, Series};

/// Default kernel bandwidth as a fraction of the span.
pub const DEFAULT_BANDWIDTH: f64 = 0.15;

/// Start year given to simulated paths.
pub const SIM_START_YEAR: i32 = 1;

type CoefFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficient and scale functions of rescaled time.
pub struct TvarSpec {
    alpha_fns: Vec<CoefFn>,
    sigma_fn: CoefFn,
}

impl fmt::Debug for TvarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TvarSpec")
            .field("order", &self.order())
            .finish_non_exhaustive()
    }
}

impl TvarSpec {
    pub fn new(alpha_fns: Vec<CoefFn>, sigma_fn: CoefFn) -> Self {
        TvarSpec {
            alpha_fns,
            sigma_fn,
        }
    }

    /// Constant coefficients, in the left-hand-side sign convention.
    pub fn constant(alpha: &[f64], sigma: f64) -> Self {
        let alpha_fns = alpha
            .iter()
            .map(|&a| Box::new(move |_: f64| a) as CoefFn)
            .collect();
        TvarSpec::new(alpha_fns, Box::new(move |_| sigma))
    }

    pub fn order(&self) -> usize {
        self.alpha_fns.len()
    }

    pub fn alpha(&self, u: f64) -> Vec<f64> {
        self.alpha_fns.iter().map(|f| f(u)).collect()
    }

    pub fn sigma(&self, u: f64) -> f64 {
        (self.sigma_fn)(u)
    }

    /// Checks positivity of `σ(u)` and stationarity of the frozen AR
    /// polynomial at `u`.
    pub fn check_at(&self, u: f64) -> Result<()> {
        let s = self.sigma(u);
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sigma({u}) = {s} is not positive"
            )));
        }
        let rho: Vec<f64> = self.alpha(u).iter().map(|a| -a).collect();
        if !is_stationary(&rho) {
            return Err(Error::NonStationary(rho));
        }
        Ok(())
    }
}

/// Simulates `n` values at rescaled times `u = 1/n, ..., 1` after a burn-in
/// of `10 p` steps with the coefficients frozen at `u = 0`.
pub fn simulate_tvar(spec: &TvarSpec, n: usize, seed: u64) -> Result<Series> {
    let p = spec.order();
    if n == 0 || n < 10 * p {
        return Err(Error::InsufficientData {
            needed: (10 * p).max(1),
            available: n,
        });
    }
    spec.check_at(0.0)?;
    let frozen = (spec.alpha(0.0), spec.sigma(0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; p];
    y.reserve(10 * p + n);
    let mut step = |alpha: &[f64], sigma: f64, y: &mut Vec<f64>| {
        let m = y.len();
        let e: f64 = StandardNormal.sample(&mut rng);
        let ar: f64 = alpha
            .iter()
            .enumerate()
            .map(|(j, a)| a * y[m - j - 1])
            .sum();
        y.push(sigma * e - ar);
    };
    for _ in 0..10 * p {
        step(&frozen.0, frozen.1, &mut y);
    }
    for t in 1..=n {
        let u = t as f64 / n as f64;
        spec.check_at(u)?;
        step(&spec.alpha(u), spec.sigma(u), &mut y);
    }
    Series::new("y", SIM_START_YEAR, y.split_off(11 * p))
}

/// Local estimates at one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvarPoint {
    pub year: i32,
    pub u: f64,
    pub intercept: f64,
    pub alpha: Vec<f64>,
    pub sigma: f64,
    pub se_alpha: Vec<f64>,
    pub se_sigma: f64,
}

/// Coefficient and scale curves from local kernel-weighted fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvarFit {
    pub order: usize,
    pub bandwidth: f64,
    pub points: Vec<TvarPoint>,
}

impl TvarFit {
    pub fn years(&self) -> Vec<i32> {
        self.points.iter().map(|p| p.year).collect()
    }

    pub fn sigma_curve(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.sigma).collect()
    }

    pub fn alpha_curve(&self, j: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.alpha[j]).collect()
    }

    /// Curves as a frame: `alpha_1..alpha_p, sigma, se_alpha_1.., se_sigma`.
    pub fn to_frame(&self) -> Result<Frame> {
        let first = self
            .points
            .first()
            .ok_or(Error::InsufficientData {
                needed: 1,
                available: 0,
            })?
            .year;
        let len = (self.points.last().unwrap().year - first + 1) as usize;
        let column = |name: String, get: &dyn Fn(&TvarPoint) -> f64| {
            let mut v = vec![f64::NAN; len];
            for p in &self.points {
                v[(p.year - first) as usize] = get(p);
            }
            Series::new(name, first, v)
        };
        let mut cols = Vec::new();
        for j in 0..self.order {
            cols.push(column(format!("alpha_{}", j + 1), &|p| p.alpha[j])?);
        }
        cols.push(column("sigma".into(), &|p| p.sigma)?);
        for j in 0..self.order {
            cols.push(column(format!("se_alpha_{}", j + 1), &|p| p.se_alpha[j])?);
        }
        cols.push(column("se_sigma".into(), &|p| p.se_sigma)?);
        Frame::new(cols)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_csv_to(&self.to_frame()?, writer)
    }
}

/// Local Gaussian-kernel estimates of the AR coefficients and innovation
/// scale at every year with a complete lag row.
///
/// At year `t` the rows `s` are weighted by `exp(-½((u_s - u_t)/h)²)` with
/// `h = bandwidth` and `u = (index + 1) / n`. The local conditional Gaussian
/// likelihood with an intercept is maximized by weighted least squares;
/// standard errors are of sandwich form.
pub fn fit_tvar_local(s: &Series, order: usize, bandwidth: f64) -> Result<TvarFit> {
    if !(bandwidth > 0.0 && bandwidth <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "bandwidth {bandwidth} must lie in (0, 1]"
        )));
    }
    let n = s.len();
    let needed = 5 * (order + 2);
    if bandwidth * (n as f64) < needed as f64 {
        return Err(Error::InsufficientData {
            needed: (needed as f64 / bandwidth).ceil() as usize,
            available: n,
        });
    }
    let q = order + 1;
    let rows: Vec<(usize, Vec<f64>, f64)> = (order..n)
        .filter_map(|t| {
            let y = s.at(t)?;
            let mut x = Vec::with_capacity(q);
            x.push(1.0);
            for j in 1..=order {
                x.push(s.at(t - j)?);
            }
            Some((t, x, y))
        })
        .collect();
    if rows.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            available: rows.len(),
        });
    }
    let nf = n as f64;
    let points = rows
        .par_iter()
        .map(|(t0, _, _)| {
            let u0 = (*t0 + 1) as f64 / nf;
            let w: Vec<f64> = rows
                .iter()
                .map(|(t, _, _)| {
                    let z = ((*t + 1) as f64 / nf - u0) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .collect();
            local_fit(&rows, &w, order).map(|(coef, se, sigma, se_sigma)| TvarPoint {
                year: s.start_year + *t0 as i32,
                u: u0,
                intercept: coef[0],
                alpha: coef[1..].iter().map(|c| -c).collect(),
                sigma,
                se_alpha: se[1..].to_vec(),
                se_sigma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TvarFit {
        order,
        bandwidth,
        points,
    })
}

type LocalEstimate = (Vec<f64>, Vec<f64>, f64, f64);

fn local_fit(rows: &[(usize, Vec<f64>, f64)], w: &[f64], order: usize) -> Result<LocalEstimate> {
    let q = order + 1;
    let mut xtwx = DMatrix::<f64>::zeros(q, q);
    let mut xtwy = DVector::<f64>::zeros(q);
    let mut sw = 0.0;
    for ((_, x, y), &wi) in rows.iter().zip(w) {
        sw += wi;
        for a in 0..q {
            xtwy[a] += wi * x[a] * y;
            for b in 0..q {
                xtwx[(a, b)] += wi * x[a] * x[b];
            }
        }
    }
    let inv = xtwx.clone().try_inverse().ok_or(Error::SingularDesign)?;
    let coef = &inv * &xtwy;
    let resid: Vec<f64> = rows
        .iter()
        .map(|(_, x, y)| y - x.iter().zip(coef.iter()).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    let s2 = rows
        .iter()
        .zip(w)
        .zip(&resid)
        .map(|((_, wi), e)| wi * e * e)
        .sum::<f64>()
        / sw;
    if !(s2 > 0.0) {
        return Err(Error::ZeroVariance("local residuals".into()));
    }
    let mut meat = DMatrix::<f64>::zeros(q, q);
    let mut v_s2 = 0.0;
    for (((_, x, _), &wi), e) in rows.iter().zip(w).zip(&resid) {
        let we2 = wi * wi * e * e;
        for a in 0..q {
            for b in 0..q {
                meat[(a, b)] += we2 * x[a] * x[b];
            }
        }
        v_s2 += (wi * (e * e - s2)).powi(2);
    }
    let cov = &inv * meat * &inv;
    let se = (0..q).map(|a| cov[(a, a)].max(0.0).sqrt()).collect();
    let sigma = s2.sqrt();
    let se_sigma = v_s2.sqrt() / sw / (2.0 * sigma);
    Ok((coef.as_slice().to_vec(), se, sigma, se_sigma))
}
