//! Confidence distributions, confidence curves and their combination, plus
//! conditional-Gaussian reconstruction of missing years.
//!
//! A confidence distribution `C(theta)` is either normal (center, spread)
//! or a monotone grid of `(theta, C)` pairs. Combining several sources
//! converts each to the log-likelihood `-Phi^{-1}(C)^2 / 2`, adds them, and
//! turns the sum back into a distribution through the signed root of the
//! deviance. For normal inputs this is the precision-weighted average.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::argauss::{ar_autocovariance, design_row, forecast_with, ArxFit};
use crate::dist::{normal_cdf, normal_quantile};
use crate::error::{Error, Result};
use crate::frame::{format_number, Frame, Series};
use crate::modelsel::{focus_with_variance, FocusSpec};

/// Grid size used when a combination has to go through log-likelihoods.
pub const COMBINE_GRID: usize = 4001;

const TAIL_P: f64 = 1e-9;
const C_CLAMP: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CdShape {
    Normal,
    /// `C` through the points, interpolated on the probit scale and
    /// constant outside.
    Grid {
        theta: Vec<f64>,
        c: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceDistribution {
    pub focus_label: String,
    /// Median confidence estimate.
    pub center: f64,
    /// Standard error for the normal family; half the central 68.27% width for grids.
    pub spread: f64,
    #[serde(flatten)]
    pub shape: CdShape,
}

impl ConfidenceDistribution {
    pub fn normal(focus_label: impl Into<String>, center: f64, spread: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidInput(format!(
                "center {center} is not finite"
            )));
        }
        if !(spread > 0.0 && spread.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "spread {spread} must be positive"
            )));
        }
        Ok(Self {
            focus_label: focus_label.into(),
            center,
            spread,
            shape: CdShape::Normal,
        })
    }

    /// Normal CD whose equal-tailed `level` interval is `[lo, hi]`.
    pub fn from_interval(
        focus_label: impl Into<String>,
        lo: f64,
        hi: f64,
        level: f64,
    ) -> Result<Self> {
        check_level(level)?;
        if !(hi > lo) {
            return Err(Error::InvalidInput(format!(
                "interval [{lo}, {hi}] is empty"
            )));
        }
        let z = normal_quantile(0.5 + level / 2.0);
        Self::normal(focus_label, 0.5 * (lo + hi), (hi - lo) / (2.0 * z))
    }

    pub fn from_grid(focus_label: impl Into<String>, theta: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if theta.len() != c.len() || theta.len() < 2 {
            return Err(Error::InvalidInput(
                "grid needs at least two matching points".into(),
            ));
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "grid theta must be strictly increasing".into(),
            ));
        }
        if c.windows(2).any(|w| w[1] < w[0]) || c.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput(
                "grid C must be non-decreasing within [0, 1]".into(),
            ));
        }
        if c[0] > 0.5 || *c.last().unwrap() < 0.5 {
            return Err(Error::InvalidInput("grid does not cover the median".into()));
        }
        let mut cd = Self {
            focus_label: focus_label.into(),
            center: 0.0,
            spread: 1.0,
            shape: CdShape::Grid { theta, c },
        };
        cd.center = cd.quantile(0.5)?;
        let (lo, hi) = (
            cd.quantile(normal_cdf(-1.0))?,
            cd.quantile(normal_cdf(1.0))?,
        );
        cd.spread = 0.5 * (hi - lo);
        if !(cd.spread > 0.0) {
            return Err(Error::InvalidInput("grid CD is degenerate".into()));
        }
        Ok(cd)
    }

    pub fn is_normal(&self) -> bool {
        matches!(self.shape, CdShape::Normal)
    }

    /// `C(theta)`.
    pub fn cdf(&self, theta: f64) -> f64 {
        match &self.shape {
            CdShape::Normal => normal_cdf((theta - self.center) / self.spread),
            CdShape::Grid { theta: t, c } => interp(t, c, theta),
        }
    }

    /// `C^{-1}(p)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(format!(
                "probability {p} outside (0, 1)"
            )));
        }
        match &self.shape {
            CdShape::Normal => Ok(self.center + self.spread * normal_quantile(p)),
            CdShape::Grid { theta, c } => {
                if p < c[0] || p > *c.last().unwrap() {
                    return Err(Error::InvalidInput(format!(
                        "probability {p} outside the grid's range"
                    )));
                }
                let i = c.partition_point(|v| *v < p).max(1).min(c.len() - 1);
                let (c0, c1) = (c[i - 1], c[i]);
                if c1 == c0 {
                    return Ok(theta[i - 1]);
                }
                let (z0, z1, zp) = (normal_quantile(c0), normal_quantile(c1), normal_quantile(p));
                let w = if z0.is_finite() && z1.is_finite() {
                    (zp - z0) / (z1 - z0)
                } else {
                    (p - c0) / (c1 - c0)
                };
                Ok(theta[i - 1] + w * (theta[i] - theta[i - 1]))
            }
        }
    }

    /// Equal-tailed interval `[C^{-1}((1-level)/2), C^{-1}((1+level)/2)]`.
    pub fn interval(&self, level: f64) -> Result<(f64, f64)> {
        interval(self, level)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cd: Self = serde_json::from_str(s)?;
        match cd.shape {
            CdShape::Normal => Self::normal(cd.focus_label, cd.center, cd.spread),
            CdShape::Grid { theta, c } => Self::from_grid(cd.focus_label, theta, c),
        }
    }

    /// Plot grid: `points` values spanning the central `1 - 2e-4` mass.
    pub fn grid_points(&self, points: usize) -> Result<Vec<f64>> {
        if points < 2 {
            return Err(Error::InvalidInput("need at least two grid points".into()));
        }
        let (lo, hi) = match &self.shape {
            CdShape::Normal => (self.quantile(1e-4)?, self.quantile(1.0 - 1e-4)?),
            CdShape::Grid { theta, .. } => (theta[0], *theta.last().unwrap()),
        };
        Ok((0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect())
    }

    /// CSV with columns `theta,C,cc`.
    pub fn write_grid_csv<W: Write>(&self, writer: W, points: usize) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["theta", "C", "cc"])?;
        for t in self.grid_points(points)? {
            let c = self.cdf(t);
            w.write_record([
                format_number(t),
                format_number(c),
                format_number((1.0 - 2.0 * c).abs()),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Linear interpolation of `Phi^{-1}(C)`, exact for normal-shaped grids.
/// Segments touching 0 or 1 are interpolated linearly in `C`.
fn interp(x: &[f64], y: &[f64], at: f64) -> f64 {
    if at <= x[0] {
        return y[0];
    }
    if at >= *x.last().unwrap() {
        return *y.last().unwrap();
    }
    let i = x.partition_point(|v| *v <= at);
    let w = (at - x[i - 1]) / (x[i] - x[i - 1]);
    let (z0, z1) = (normal_quantile(y[i - 1]), normal_quantile(y[i]));
    if z0.is_finite() && z1.is_finite() {
        normal_cdf(z0 + w * (z1 - z0))
    } else {
        y[i - 1] + w * (y[i] - y[i - 1])
    }
}

fn check_level(level: f64) -> Result<()> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("level {level} outside (0, 1)")))
    }
}

/// Equal-tailed confidence interval at `level`.
pub fn interval(cd: &ConfidenceDistribution, level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    Ok((
        cd.quantile(0.5 - level / 2.0)?,
        cd.quantile(0.5 + level / 2.0)?,
    ))
}

/// `cc(theta) = |1 - 2 C(theta)|` of a confidence distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceCurve {
    pub cd: ConfidenceDistribution,
}

impl ConfidenceCurve {
    pub fn value(&self, theta: f64) -> f64 {
        (1.0 - 2.0 * self.cd.cdf(theta)).abs()
    }

    /// Endpoints of `{theta : cc(theta) <= gamma}`.
    pub fn level_set(&self, gamma: f64) -> Result<(f64, f64)> {
        interval(&self.cd, gamma)
    }
}

pub fn confidence_curve(cd: &ConfidenceDistribution) -> ConfidenceCurve {
    ConfidenceCurve { cd: cd.clone() }
}

/// Normal CD for a focus parameter from a fitted model: center at the focus
/// estimate, spread the delta-method standard error. For prediction foci
/// the forecast's own innovation variance is added.
pub fn cd_from_fit(
    fit: &ArxFit,
    frame: &Frame,
    focus: &FocusSpec,
) -> Result<ConfidenceDistribution> {
    cd_from_fit_with(fit, frame, focus, None)
}

pub fn cd_from_fit_with(
    fit: &ArxFit,
    frame: &Frame,
    focus: &FocusSpec,
    future: Option<&Frame>,
) -> Result<ConfidenceDistribution> {
    let (est, mut var) = focus_with_variance(fit, frame, focus, future)?;
    if let FocusSpec::Prediction { horizon } = focus {
        let sd = forecast_with(fit, frame, *horizon, future)?
            .last()
            .unwrap()
            .sd;
        var += sd * sd;
    }
    if !(var > 0.0) {
        return Err(Error::ZeroVariance(focus.to_string()));
    }
    ConfidenceDistribution::normal(focus.to_string(), est, var.sqrt())
}

/// Combines CDs for the same focus by adding their implied log-likelihoods.
pub fn combine(cds: &[ConfidenceDistribution]) -> Result<ConfidenceDistribution> {
    if cds.len() < 2 {
        return Err(Error::InvalidInput(
            "combination needs at least two distributions".into(),
        ));
    }
    let label = &cds[0].focus_label;
    if let Some(other) = cds.iter().find(|c| &c.focus_label != label) {
        return Err(Error::InvalidInput(format!(
            "cannot combine '{label}' with '{}'",
            other.focus_label
        )));
    }
    if cds.iter().all(|c| c.is_normal()) {
        let prec: f64 = cds.iter().map(|c| c.spread.powi(-2)).sum();
        let center = cds
            .iter()
            .map(|c| c.center * c.spread.powi(-2))
            .sum::<f64>()
            / prec;
        return ConfidenceDistribution::normal(label.clone(), center, prec.powf(-0.5));
    }
    combine_on_grid(cds, COMBINE_GRID)
}

/// Log-likelihood route on an explicit grid; applies to any family.
pub fn combine_on_grid(
    cds: &[ConfidenceDistribution],
    points: usize,
) -> Result<ConfidenceDistribution> {
    if cds.len() < 2 || points < 3 {
        return Err(Error::InvalidInput(
            "combination needs two inputs and three grid points".into(),
        ));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in cds {
        let (a, b) = match &c.shape {
            CdShape::Normal => (c.quantile(TAIL_P)?, c.quantile(1.0 - TAIL_P)?),
            CdShape::Grid { theta, .. } => (theta[0], *theta.last().unwrap()),
        };
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let theta: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let ll: Vec<f64> = theta
        .iter()
        .map(|&t| {
            cds.iter()
                .map(|c| {
                    let z = normal_quantile(c.cdf(t).clamp(C_CLAMP, 1.0 - C_CLAMP));
                    -0.5 * z * z
                })
                .sum()
        })
        .collect();
    let imax = (0..points)
        .max_by(|&a, &b| ll[a].total_cmp(&ll[b]))
        .unwrap();
    // parabolic refinement of the maximum
    let (tmax, lmax) = if imax > 0 && imax + 1 < points {
        let (a, b, c) = (ll[imax - 1], ll[imax], ll[imax + 1]);
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            let off = 0.5 * (a - c) / denom;
            let h = theta[1] - theta[0];
            (theta[imax] + off * h, b - 0.25 * (a - c) * off)
        } else {
            (theta[imax], b)
        }
    } else {
        (theta[imax], ll[imax])
    };
    // interpolated grid inputs can leave small ripples in the sum; the
    // running maximum keeps C monotone
    let mut run = 0.0f64;
    let c: Vec<f64> = theta
        .iter()
        .zip(&ll)
        .map(|(&t, &l)| {
            let dev = (2.0 * (lmax - l)).max(0.0).sqrt();
            run = run.max(normal_cdf(if t < tmax { -dev } else { dev }));
            run
        })
        .collect();
    ConfidenceDistribution::from_grid(cds[0].focus_label.clone(), theta, c)
}

/// Filled series with the conditional standard deviation of each entry
/// (zero where observed).
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub values: Series,
    pub sd: Series,
}

/// Replaces masked entries by their conditional mean given the observed
/// years within `3k + 10` of each gap, under the fitted stationary model.
pub fn reconstruct_missing(s: &Series, fit: &ArxFit) -> Result<Reconstruction> {
    let k = fit.spec.ar_order;
    let gamma = ar_autocovariance(&fit.rho, fit.sigma, s.len())
        .ok_or_else(|| Error::NonStationary(fit.rho.clone()))?;
    if s.n_observed() == 0 {
        return Err(Error::MissingValue(format!(
            "{} has no observations",
            s.name
        )));
    }
    let frame = Frame::new(vec![s.clone().renamed(fit.spec.response.clone())])?;
    let mean = (0..s.len())
        .map(|i| {
            let row = design_row(&fit.spec, &frame, None, s.start_year + i as i32)?;
            Ok(row.iter().zip(&fit.beta).map(|(a, b)| a * b).sum())
        })
        .collect::<Result<Vec<f64>>>()?;

    let n = s.len();
    let mut values: Vec<f64> = (0..n).map(|i| s.at(i).unwrap_or(f64::NAN)).collect();
    let mut sds = vec![0.0; n];
    let window = 3 * k + 10;
    let mut i = 0;
    while i < n {
        if !s.is_masked(i) {
            i += 1;
            continue;
        }
        let a = i;
        while i < n && s.is_masked(i) {
            i += 1;
        }
        let gap: Vec<usize> = (a..i).collect();
        let obs: Vec<usize> = (a.saturating_sub(window)..(i + window).min(n))
            .filter(|&t| !s.is_masked(t))
            .collect();
        let cov = |x: &[usize], y: &[usize]| {
            DMatrix::from_fn(x.len(), y.len(), |r, c| gamma[x[r].abs_diff(y[c])])
        };
        let s_gg = cov(&gap, &gap);
        if obs.is_empty() {
            for (j, &t) in gap.iter().enumerate() {
                values[t] = mean[t];
                sds[t] = s_gg[(j, j)].sqrt();
            }
            continue;
        }
        let s_go = cov(&gap, &obs);
        let s_oo = cov(&obs, &obs);
        let dev = DVector::from_iterator(obs.len(), obs.iter().map(|&t| values[t] - mean[t]));
        let chol = s_oo.cholesky().ok_or(Error::SingularInformation)?;
        let w = chol.solve(&s_go.transpose());
        let cond_mean = w.transpose() * dev;
        let cond_cov = &s_gg - &s_go * &w;
        for (j, &t) in gap.iter().enumerate() {
            values[t] = mean[t] + cond_mean[j];
            sds[t] = cond_cov[(j, j)].max(0.0).sqrt();
        }
    }
    Ok(Reconstruction {
        values: Series::new(s.name.clone(), s.start_year, values)?,
        sd: Series::new(format!("{}_sd", s.name), s.start_year, sds)?,
    })
}
