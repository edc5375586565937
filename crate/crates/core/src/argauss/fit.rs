use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::design::{Design, RowAlignment};
use super::spec::{ArxParams, ArxSpec};
use super::stationarity::{is_stationary, yule_walker};
use crate::error::{Error, Result};
use crate::frame::Frame;

const MAX_ITERATIONS: usize = 500;
const FD_REL_STEP: f64 = 1e-5;

/// Fitted parameters of an [`ArxSpec`] by conditional maximum likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArxFit {
    pub spec: ArxSpec,
    pub beta: Vec<f64>,
    pub rho: Vec<f64>,
    pub sigma: f64,
    pub loglik_max: f64,
    /// Inverse observed information, row-major over `(beta, rho, sigma)`.
    /// Empty when the fit was run without covariance.
    pub vcov: Vec<f64>,
    pub n_effective: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub stationary: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<RowAlignment>,
}

impl ArxFit {
    pub fn params(&self) -> ArxParams {
        ArxParams::new(self.beta.clone(), self.rho.clone(), self.sigma)
    }

    pub fn n_params(&self) -> usize {
        self.spec.n_params()
    }

    pub fn has_vcov(&self) -> bool {
        !self.vcov.is_empty()
    }

    pub fn vcov_matrix(&self) -> Result<DMatrix<f64>> {
        let p = self.n_params();
        if self.vcov.len() != p * p {
            return Err(Error::InvalidInput(
                "fit carries no covariance matrix".into(),
            ));
        }
        Ok(DMatrix::from_row_slice(p, p, &self.vcov))
    }

    /// Standard errors in `(beta, rho, sigma)` order.
    pub fn std_errors(&self) -> Result<Vec<f64>> {
        let v = self.vcov_matrix()?;
        Ok((0..v.nrows()).map(|i| v[(i, i)].max(0.0).sqrt()).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Knobs for [`fit_with`].
#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Reject fits whose AR part is not stationary.
    pub require_stationary: bool,
    pub compute_vcov: bool,
    pub alignment: Option<RowAlignment>,
    /// Starting AR coefficients tried before the default starts.
    pub warm_start: Option<Vec<f64>>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            require_stationary: true,
            compute_vcov: true,
            alignment: None,
            warm_start: None,
        }
    }
}

/// Conditional maximum-likelihood fit with default options.
pub fn fit(spec: &ArxSpec, frame: &Frame) -> Result<ArxFit> {
    fit_with(spec, frame, &FitOptions::default())
}

pub fn fit_with(spec: &ArxSpec, frame: &Frame, opts: &FitOptions) -> Result<ArxFit> {
    let design = Design::build(spec, frame, opts.alignment.as_ref())?;
    fit_design(spec, &design, opts)
}

/// Zero-residual fit with independent errors, for responses the regression
/// reproduces exactly. Used by the monitors, where such stretches occur.
pub(crate) fn exact_fit(spec: &ArxSpec, frame: &Frame, opts: &FitOptions) -> Result<ArxFit> {
    let d = Design::build(spec, frame, opts.alignment.as_ref())?;
    if d.n_eff() == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let pr = profile(&d, &vec![0.0; d.k])?;
    if pr.rss != 0.0 {
        return Err(Error::InvalidInput(
            "response is not reproduced exactly".into(),
        ));
    }
    Ok(ArxFit {
        spec: spec.clone(),
        beta: pr.beta,
        rho: pr.rho,
        sigma: 0.0,
        loglik_max: f64::INFINITY,
        vcov: Vec::new(),
        n_effective: d.n_eff(),
        first_year: d.years[d.usable[0]],
        last_year: d.years[*d.usable.last().unwrap()],
        stationary: true,
        alignment: opts.alignment.clone(),
    })
}

/// Conditional Gaussian log-likelihood of `params` on the rows `spec` uses.
pub fn loglik(params: &ArxParams, spec: &ArxSpec, frame: &Frame) -> Result<f64> {
    loglik_aligned(params, spec, frame, None)
}

pub fn loglik_aligned(
    params: &ArxParams,
    spec: &ArxSpec,
    frame: &Frame,
    alignment: Option<&RowAlignment>,
) -> Result<f64> {
    params.check(spec)?;
    let design = Design::build(spec, frame, alignment)?;
    if design.n_eff() == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    Ok(design.loglik(params))
}

/// Per-row conditional log-likelihood contributions with their years.
pub fn loglik_contributions(
    params: &ArxParams,
    spec: &ArxSpec,
    frame: &Frame,
) -> Result<Vec<(i32, f64)>> {
    params.check(spec)?;
    let design = Design::build(spec, frame, None)?;
    let c = design.contributions(params);
    Ok(design
        .usable
        .iter()
        .map(|&t| design.years[t])
        .zip(c)
        .collect())
}

struct Profile {
    rho: Vec<f64>,
    beta: Vec<f64>,
    u: Vec<f64>,
    rss: f64,
    q: Option<DMatrix<f64>>,
}

/// Closed-form coefficients for fixed AR terms: least squares on the
/// quasi-differenced data.
fn profile(d: &Design, rho: &[f64]) -> Result<Profile> {
    let n = d.n_eff();
    let m = d.m;
    let mut y = DVector::zeros(n);
    let mut x = DMatrix::zeros(n, m);
    for (i, &t) in d.usable.iter().enumerate() {
        let mut yi = d.z[t];
        for (j, r) in rho.iter().enumerate() {
            yi -= r * d.z[t - j - 1];
        }
        y[i] = yi;
        for c in 0..m {
            let mut xi = d.x[t][c];
            for (j, r) in rho.iter().enumerate() {
                xi -= r * d.x[t - j - 1][c];
            }
            x[(i, c)] = xi;
        }
    }
    if m == 0 {
        let rss = y.norm_squared();
        return Ok(Profile {
            rho: rho.to_vec(),
            beta: Vec::new(),
            u: y.as_slice().to_vec(),
            rss,
            q: None,
        });
    }
    let col_norms: Vec<f64> = (0..m).map(|c| x.column(c).norm()).collect();
    let qr = x.clone().qr();
    let r = qr.r();
    let q = qr.q();
    for c in 0..m {
        if !(r[(c, c)].abs() > 1e-10 * col_norms[c].max(1e-300)) {
            return Err(Error::SingularDesign);
        }
    }
    let qty = q.transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::SingularDesign)?;
    let u = &y - &x * &beta;
    Ok(Profile {
        rho: rho.to_vec(),
        beta: beta.as_slice().to_vec(),
        rss: u.norm_squared(),
        u: u.as_slice().to_vec(),
        q: Some(q),
    })
}

/// Gauss–Newton over the AR coefficients of the concentrated objective,
/// with the coefficient derivative projected out.
fn optimise_rho(d: &Design, start: &[f64]) -> Result<Profile> {
    let k = d.k;
    let n = d.n_eff();
    let mut cur = profile(d, start)?;
    if k == 0 {
        return Ok(cur);
    }
    for _ in 0..MAX_ITERATIONS {
        let mut e = DMatrix::zeros(n, k);
        for (i, &t) in d.usable.iter().enumerate() {
            for j in 0..k {
                e[(i, j)] = d.resid(t - j - 1, &cur.beta);
            }
        }
        let mut a = e.transpose() * &e;
        if let Some(q) = &cur.q {
            let qe = q.transpose() * &e;
            a -= qe.transpose() * qe;
        }
        let g = e.transpose() * DVector::from_column_slice(&cur.u);
        let delta = match a.clone().cholesky() {
            Some(ch) => ch.solve(&g),
            None => match a.lu().solve(&g) {
                Some(s) => s,
                None => return Ok(cur),
            },
        };
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-12 {
            let cand: Vec<f64> = cur
                .rho
                .iter()
                .zip(delta.iter())
                .map(|(r, dl)| r + step * dl)
                .collect();
            if let Ok(p) = profile(d, &cand) {
                if p.rss <= cur.rss {
                    accepted = Some(p);
                    break;
                }
            }
            step *= 0.5;
        }
        let Some(next) = accepted else {
            return Ok(cur);
        };
        let moved = next
            .rho
            .iter()
            .zip(&cur.rho)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let gain = cur.rss - next.rss;
        cur = next;
        if moved < 1e-12 || gain <= 1e-15 * cur.rss.max(1e-300) {
            return Ok(cur);
        }
    }
    Err(Error::NonConvergence(MAX_ITERATIONS))
}

fn yule_walker_start(d: &Design) -> Option<Vec<f64>> {
    let p0 = profile(d, &vec![0.0; d.k]).ok()?;
    let n = d.n_eff() as f64;
    let acov: Vec<f64> = (0..=d.k)
        .map(|h| {
            d.usable
                .iter()
                .map(|&t| d.resid(t, &p0.beta) * d.resid(t - h, &p0.beta))
                .sum::<f64>()
                / n
        })
        .collect();
    let rho = yule_walker(&acov)?;
    rho.iter().all(|r| r.is_finite()).then_some(rho)
}

pub(crate) fn fit_design(spec: &ArxSpec, d: &Design, opts: &FitOptions) -> Result<ArxFit> {
    let p = spec.n_params();
    if d.n_eff() < p + 2 {
        return Err(Error::InsufficientData {
            needed: p + 2,
            available: d.n_eff(),
        });
    }
    let k = spec.ar_order;
    let mut starts: Vec<Vec<f64>> = Vec::new();
    if let Some(w) = &opts.warm_start {
        if w.len() == k {
            starts.push(w.clone());
        }
    }
    if k > 0 {
        if let Some(yw) = yule_walker_start(d) {
            starts.push(yw);
        }
    }
    starts.push(vec![0.0; k]);

    let mut best: Option<Profile> = None;
    let mut last_err = None;
    for s in &starts {
        match optimise_rho(d, s) {
            Ok(pr) => {
                if best.as_ref().is_none_or(|b| pr.rss < b.rss) {
                    best = Some(pr);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let best = match (best, last_err) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one start"),
    };
    if !(best.rss > 0.0) {
        return Err(Error::ZeroVariance(spec.response.clone()));
    }
    let stationary = is_stationary(&best.rho);
    if opts.require_stationary && !stationary {
        return Err(Error::NonStationary(best.rho));
    }
    let sigma = (best.rss / d.n_eff() as f64).sqrt();
    let params = ArxParams::new(best.beta, best.rho, sigma);
    let loglik_max = d.loglik(&params);
    let vcov = if opts.compute_vcov {
        let info = observed_information(spec, d, &params);
        let inv = info.cholesky().ok_or(Error::SingularInformation)?.inverse();
        let sym = (&inv + inv.transpose()) * 0.5;
        // row-major
        sym.transpose().as_slice().to_vec()
    } else {
        Vec::new()
    };
    Ok(ArxFit {
        spec: spec.clone(),
        beta: params.beta,
        rho: params.rho,
        sigma,
        loglik_max,
        vcov,
        n_effective: d.n_eff(),
        first_year: d.years[d.usable[0]],
        last_year: d.years[*d.usable.last().unwrap()],
        stationary,
        alignment: opts.alignment.clone(),
    })
}

/// Negative Hessian of the log-likelihood by central differences.
fn observed_information(spec: &ArxSpec, d: &Design, params: &ArxParams) -> DMatrix<f64> {
    let theta = params.to_vec();
    let p = theta.len();
    let f = |th: &[f64]| -> f64 {
        let pr = ArxParams::from_slice(spec, th).expect("length fixed");
        d.loglik(&pr)
    };
    let h: Vec<f64> = theta
        .iter()
        .map(|t| FD_REL_STEP * t.abs().max(1.0))
        .collect();
    let f0 = f(&theta);
    let mut hess = DMatrix::zeros(p, p);
    let mut th = theta.clone();
    for i in 0..p {
        th[i] = theta[i] + h[i];
        let fp = f(&th);
        th[i] = theta[i] - h[i];
        let fm = f(&th);
        th[i] = theta[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut eval = |si: f64, sj: f64| {
                th[i] = theta[i] + si * h[i];
                th[j] = theta[j] + sj * h[j];
                let v = f(&th);
                th[i] = theta[i];
                th[j] = theta[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    -hess
}
