//! Dynamic goodness-of-fit and structural-change diagnostics.
//!
//! * One-step prediction monitoring: refit on the past, predict the next
//!   year, and map the standardized error through the chi-squared(1)
//!   distribution function. Under a correct model the values are uniform.
//! * The likelihood monitoring bridge
//!   `B_{n,j} = (l_j - (j/n) l_n) / (sqrt(n) kappa)`, which behaves like a
//!   Brownian bridge when the model is stable over the whole span.
//! * A Gaussian-kernel rolling standard deviation and the augmented
//!   Dickey–Fuller unit-root test.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::argauss::{
    exact_fit, fit_with, forecast_with, loglik_contributions, ArxFit, ArxSpec, FitOptions,
};
use crate::dist::chi2_1_cdf;
use crate::error::{Error, Result};
use crate::frame::{write_csv_to, Frame, Series};

/// 95% two-sided band of the supremum of a Brownian bridge.
pub const BRIDGE_BAND_95: f64 = 1.358;

/// Extra observations beyond the parameter count before monitoring starts.
pub const MIN_EXTRA_OBS: usize = 5;

/// Default rolling-sd bandwidth in years.
pub const DEFAULT_BANDWIDTH: f64 = 10.0;

fn monitor_options(warm: Option<Vec<f64>>) -> FitOptions {
    FitOptions {
        require_stationary: false,
        compute_vcov: false,
        alignment: None,
        warm_start: warm,
    }
}

/// `m = Gamma_1(d^2)`.
pub fn monitoring_value(d: f64) -> f64 {
    chi2_1_cdf(d * d)
}

/// One monitored year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorRow {
    pub year: i32,
    pub observed: Option<f64>,
    pub predicted: Option<f64>,
    pub sd: Option<f64>,
    pub d: Option<f64>,
    pub m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionMonitor {
    pub model: String,
    pub rows: Vec<MonitorRow>,
}

impl PredictionMonitor {
    pub fn start_year(&self) -> i32 {
        self.rows[0].year
    }

    /// The m_t values as a series named `m`.
    pub fn m_series(&self) -> Result<Series> {
        let v: Vec<Option<f64>> = self.rows.iter().map(|r| r.m).collect();
        Series::from_options("m", self.start_year(), &v)
    }

    pub fn m_values(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.m).collect()
    }

    pub fn to_frame(&self) -> Result<Frame> {
        let col = |name: &str, f: &dyn Fn(&MonitorRow) -> Option<f64>| {
            let v: Vec<Option<f64>> = self.rows.iter().map(f).collect();
            Series::from_options(name, self.start_year(), &v)
        };
        Frame::new(vec![
            col("observed", &|r| r.observed)?,
            col("predicted", &|r| r.predicted)?,
            col("sd", &|r| r.sd)?,
            col("d", &|r| r.d)?,
            col("m", &|r| r.m)?,
        ])
    }
}

fn check_start(frame: &Frame, start_year: i32) -> Result<()> {
    if start_year <= frame.start_year() || start_year > frame.end_year() {
        return Err(Error::InvalidInput(format!(
            "monitoring start {start_year} must lie in {}..={}",
            frame.start_year() + 1,
            frame.end_year()
        )));
    }
    Ok(())
}

fn fit_past(spec: &ArxSpec, past: &Frame, warm: Option<Vec<f64>>) -> Result<ArxFit> {
    let opts = monitor_options(warm);
    match fit_with(spec, past, &opts) {
        Err(Error::ZeroVariance(_)) => exact_fit(spec, past, &opts),
        other => other,
    }
}

/// Predictive mean and sd for `year` from a fit on the years before it.
fn predict_year(fit: &ArxFit, past: &Frame, frame: &Frame, year: i32) -> Result<(f64, f64)> {
    let origin = past
        .get(&fit.spec.response)?
        .observed()
        .last()
        .map(|(y, _)| y)
        .ok_or_else(|| Error::MissingValue(fit.spec.response.clone()))?;
    let h = (year - origin) as usize;
    let step = *forecast_with(fit, past, h, Some(frame))?.last().unwrap();
    Ok((step.mean, step.sd))
}

/// One-step prediction monitoring from `start_year` to the end of the frame.
/// Each year is predicted from a fit on all earlier years; years with a
/// missing response or a failed fit are masked.
pub fn prediction_monitor_detail(
    spec: &ArxSpec,
    frame: &Frame,
    start_year: i32,
) -> Result<PredictionMonitor> {
    spec.validate()?;
    check_start(frame, start_year)?;
    let resp = frame.get(&spec.response)?;
    let mut warm = None;
    let mut rows = Vec::new();
    for year in start_year..=frame.end_year() {
        let observed = resp.get(year);
        let past = frame.up_to(year - 1)?;
        let pred = fit_past(spec, &past, warm.clone()).and_then(|f| {
            if f.sigma > 0.0 {
                warm = Some(f.rho.clone());
            }
            predict_year(&f, &past, frame, year)
        });
        let mut row = MonitorRow {
            year,
            observed,
            predicted: None,
            sd: None,
            d: None,
            m: None,
        };
        if let Ok((mean, sd)) = pred {
            row.predicted = Some(mean);
            row.sd = Some(sd);
            if let Some(z) = observed {
                let err = z - mean;
                let d = if sd > 0.0 {
                    err / sd
                } else if err == 0.0 {
                    0.0
                } else {
                    err.signum() * f64::INFINITY
                };
                row.d = Some(d);
                row.m = Some(monitoring_value(d));
            }
        }
        rows.push(row);
    }
    Ok(PredictionMonitor {
        model: spec.label(),
        rows,
    })
}

/// Prediction monitoring values `m_t` as a series.
pub fn prediction_monitor(spec: &ArxSpec, frame: &Frame, start_year: i32) -> Result<Series> {
    prediction_monitor_detail(spec, frame, start_year)?.m_series()
}

/// Mean absolute one-step errors of the model and of the naive predictor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaeComparison {
    pub model_mae: f64,
    pub naive_mae: f64,
    pub naive_window: usize,
    /// Years entering both averages.
    pub n_years: usize,
}

/// Model MAE against the mean of the previous `naive_window` years, over
/// the monitored years where both predictions exist.
pub fn mean_abs_error_compare(
    spec: &ArxSpec,
    frame: &Frame,
    start_year: i32,
    naive_window: usize,
) -> Result<MaeComparison> {
    if naive_window == 0 {
        return Err(Error::InvalidInput(
            "naive window must be at least 1".into(),
        ));
    }
    let mon = prediction_monitor_detail(spec, frame, start_year)?;
    let resp = frame.get(&spec.response)?;
    let (mut em, mut en, mut n) = (0.0, 0.0, 0usize);
    for r in &mon.rows {
        let (Some(z), Some(p)) = (r.observed, r.predicted) else {
            continue;
        };
        let prev: Option<Vec<f64>> = (1..=naive_window as i32)
            .map(|l| resp.get(r.year - l))
            .collect();
        let Some(prev) = prev else { continue };
        let naive = prev.iter().sum::<f64>() / naive_window as f64;
        em += (z - p).abs();
        en += (z - naive).abs();
        n += 1;
    }
    if n == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    Ok(MaeComparison {
        model_mae: em / n as f64,
        naive_mae: en / n as f64,
        naive_window,
        n_years: n,
    })
}

/// Likelihood monitoring bridge over growing samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgePath {
    pub model: String,
    pub years: Vec<i32>,
    pub values: Vec<f64>,
    /// Likelihood terms in the sample ending at each year.
    pub terms: Vec<usize>,
    pub loglik_max: Vec<f64>,
    /// Full-sample maximum log-likelihood per term.
    pub a_hat: f64,
    /// Sd of the per-term log-likelihood contributions at the full-sample fit.
    pub kappa_hat: f64,
    pub n_terms: usize,
    pub band_95: f64,
}

impl BridgePath {
    pub fn to_series(&self) -> Result<Series> {
        Series::new("bridge", self.years[0], self.values.clone())
    }

    /// Two-column CSV `year,bridge`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_csv_to(&Frame::new(vec![self.to_series()?])?, writer)
    }
}

/// Computes the monitoring bridge: the model is refitted on the data up to
/// each year, starting once the sample holds `p + 5` likelihood terms.
pub fn bridge(spec: &ArxSpec, frame: &Frame) -> Result<BridgePath> {
    spec.validate()?;
    let p = spec.n_params();
    let full = fit_with(spec, frame, &monitor_options(None))?;
    let contrib = loglik_contributions(&full.params(), spec, frame)?;
    let n = contrib.len();
    if n <= p {
        return Err(Error::InsufficientData {
            needed: p + 1,
            available: n,
        });
    }
    let nf = n as f64;
    let mean = contrib.iter().map(|c| c.1).sum::<f64>() / nf;
    let kappa = (contrib.iter().map(|c| (c.1 - mean).powi(2)).sum::<f64>() / nf).sqrt();
    if !(kappa > 0.0) {
        return Err(Error::ZeroVariance("log-likelihood contributions".into()));
    }
    let l_n = full.loglik_max;
    let min_terms = p + MIN_EXTRA_OBS;
    let first = contrib
        .get(min_terms - 1)
        .map(|c| c.0)
        .ok_or(Error::InsufficientData {
            needed: min_terms,
            available: n,
        })?;

    let end = frame.end_year();
    let mut years = Vec::new();
    let mut terms = Vec::new();
    let mut lmax = Vec::new();
    let mut warm = None;
    for year in first..end {
        let f =
            fit_with(spec, &frame.up_to(year)?, &monitor_options(warm.clone())).map_err(|e| {
                Error::FitFailedAt {
                    year,
                    source: Box::new(e),
                }
            })?;
        warm = Some(f.rho.clone());
        years.push(year);
        terms.push(f.n_effective);
        lmax.push(f.loglik_max);
    }
    years.push(end);
    terms.push(n);
    lmax.push(l_n);

    let scale = nf.sqrt() * kappa;
    let values = terms
        .iter()
        .zip(&lmax)
        .map(|(&j, &l)| (l - (j as f64 / nf) * l_n) / scale)
        .collect();
    Ok(BridgePath {
        model: spec.label(),
        years,
        values,
        terms,
        loglik_max: lmax,
        a_hat: l_n / nf,
        kappa_hat: kappa,
        n_terms: n,
        band_95: BRIDGE_BAND_95,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakScan {
    pub exceeded: bool,
    pub year_at_max: i32,
    pub max_abs: f64,
}

/// Largest |B| on the path and whether it leaves the band. Ties go to the
/// earliest year.
pub fn break_scan(path: &BridgePath, band: f64) -> Result<BreakScan> {
    let (mut year, mut best) = (
        *path
            .years
            .first()
            .ok_or_else(|| Error::InvalidInput("empty bridge path".into()))?,
        f64::NEG_INFINITY,
    );
    for (&y, v) in path.years.iter().zip(&path.values) {
        if v.abs() > best {
            best = v.abs();
            year = y;
        }
    }
    Ok(BreakScan {
        exceeded: best > band,
        year_at_max: year,
        max_abs: best,
    })
}

/// Gaussian-kernel standard deviation around the kernel-weighted local mean.
/// The bandwidth is the kernel sd in years; weights use observed years only
/// and are renormalized near the ends. The weighted variance is divided by
/// `W - sum(w^2)/W` rather than `W`, removing the small-sample bias.
pub fn rolling_sd(s: &Series, bandwidth: f64) -> Result<Series> {
    if !(bandwidth >= 3.0) {
        return Err(Error::InvalidInput(format!(
            "bandwidth {bandwidth} must be at least 3"
        )));
    }
    let obs: Vec<(i32, f64)> = s.observed().collect();
    if obs.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            available: obs.len(),
        });
    }
    let vals = s
        .years()
        .map(|year| {
            let w: Vec<f64> = obs
                .iter()
                .map(|(y, _)| (-0.5 * ((y - year) as f64 / bandwidth).powi(2)).exp())
                .collect();
            let sw: f64 = w.iter().sum();
            let sw2: f64 = w.iter().map(|x| x * x).sum();
            let m = w.iter().zip(&obs).map(|(wi, o)| wi * o.1).sum::<f64>() / sw;
            let ss: f64 = w
                .iter()
                .zip(&obs)
                .map(|(wi, o)| wi * (o.1 - m).powi(2))
                .sum();
            let denom = sw - sw2 / sw;
            if denom > 0.0 {
                (ss / denom).sqrt()
            } else {
                f64::NAN
            }
        })
        .map(|v: f64| v.is_finite().then_some(v))
        .collect::<Vec<_>>();
    Series::from_options(format!("{}_sd", s.name), s.start_year, &vals)
}

/// Asymptotic Dickey–Fuller critical values, intercept-only regression.
pub const ADF_CRITICAL: [(f64, f64); 3] = [(0.01, -3.43), (0.05, -2.86), (0.10, -2.57)];

/// Minimum contiguous block length for the unit-root test.
pub const ADF_MIN_OBS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdfResult {
    pub statistic: f64,
    pub lag: usize,
    /// Regression rows.
    pub n_obs: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub p_interval: String,
    pub reject_unit_root_at_1pct: bool,
}

struct Ols {
    coef: Vec<f64>,
    se: Vec<f64>,
    rss: f64,
}

fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Ols> {
    let (n, m) = x.shape();
    if n <= m {
        return Err(Error::InsufficientData {
            needed: m + 1,
            available: n,
        });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::SingularDesign)?;
    let rss = (y - x * &coef).norm_squared();
    let rinv = r.try_inverse().ok_or(Error::SingularDesign)?;
    let xtx_inv = &rinv * rinv.transpose();
    let s2 = rss / (n - m) as f64;
    Ok(Ols {
        coef: coef.as_slice().to_vec(),
        se: (0..m).map(|i| (s2 * xtx_inv[(i, i)]).sqrt()).collect(),
        rss,
    })
}

/// ADF regression `dy_t = a + g y_{t-1} + sum_i phi_i dy_{t-i} + e_t` for
/// lags `lag`, using rows from index `first` of `y`.
fn adf_regression(y: &[f64], lag: usize, first: usize) -> Result<Ols> {
    let rows: Vec<usize> = (first..y.len()).collect();
    let x = DMatrix::from_fn(rows.len(), lag + 2, |i, c| {
        let t = rows[i];
        match c {
            0 => 1.0,
            1 => y[t - 1],
            _ => y[t - c + 1] - y[t - c],
        }
    });
    let dy = DVector::from_iterator(rows.len(), rows.iter().map(|&t| y[t] - y[t - 1]));
    ols(&x, &dy)
}

fn p_interval(stat: f64) -> String {
    match stat {
        s if s < ADF_CRITICAL[0].1 => "p < 0.01".into(),
        s if s < ADF_CRITICAL[1].1 => "0.01 < p < 0.05".into(),
        s if s < ADF_CRITICAL[2].1 => "0.05 < p < 0.10".into(),
        _ => "p > 0.10".into(),
    }
}

/// Augmented Dickey–Fuller test with intercept on the longest run of
/// observed values. The lag order is chosen by AIC over `0..=max_lag` on a
/// common sample, then the regression is refitted on all available rows.
pub fn adf_test(s: &Series, max_lag: usize) -> Result<AdfResult> {
    let (start, len) = longest_block(s);
    if len < ADF_MIN_OBS {
        return Err(Error::InsufficientData {
            needed: ADF_MIN_OBS,
            available: len,
        });
    }
    let y: Vec<f64> = (start..start + len).map(|i| s.at(i).unwrap()).collect();
    if y.len() < max_lag + ADF_MIN_OBS / 2 {
        return Err(Error::InvalidInput(format!(
            "max lag {max_lag} too large for {} values",
            y.len()
        )));
    }
    let common = max_lag + 1;
    let n_common = (y.len() - common) as f64;
    let mut best = (f64::INFINITY, 0);
    for lag in 0..=max_lag {
        let fit = adf_regression(&y, lag, common)?;
        let aic = n_common * (fit.rss / n_common).ln() + 2.0 * (lag + 2) as f64;
        if aic < best.0 {
            best = (aic, lag);
        }
    }
    let lag = best.1;
    let first = lag + 1;
    let fit = adf_regression(&y, lag, first)?;
    let statistic = fit.coef[1] / fit.se[1];
    Ok(AdfResult {
        statistic,
        lag,
        n_obs: y.len() - first,
        first_year: s.start_year + start as i32,
        last_year: s.start_year + (start + len - 1) as i32,
        p_interval: p_interval(statistic),
        reject_unit_root_at_1pct: statistic < ADF_CRITICAL[0].1,
    })
}

fn longest_block(s: &Series) -> (usize, usize) {
    let (mut best, mut cur_start, mut cur) = ((0, 0), 0, 0);
    for i in 0..s.len() {
        if s.is_masked(i) {
            cur = 0;
        } else {
            if cur == 0 {
                cur_start = i;
            }
            cur += 1;
            if cur > best.1 {
                best = (cur_start, cur);
            }
        }
    }
    best
}
