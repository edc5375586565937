//! Model scoring and selection.
//!
//! AIC and BIC tables, sequential AIC races over growing samples, and the
//! focused information criterion (FIC). The FIC estimates, per candidate,
//! the mean squared error of a focus estimate: the delta-method variance
//! from the candidate's own covariance plus a squared bias measured against
//! the widest model, with the usual correction for the noise in that bias
//! estimate and truncation at zero.

use std::fmt;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::argauss::{
    ar_autocovariance, design_row, fit_with, ArxFit, ArxParams, ArxSpec, FitOptions,
    PredictionBasis, RowAlignment,
};
use crate::dist::mvn_lower_prob;
use crate::error::{Error, Result};
use crate::frame::{Frame, Series};

const FD_REL_STEP: f64 = 1e-5;

/// `2 loglik - 2 p`.
pub fn aic_from(loglik: f64, n_params: usize) -> f64 {
    2.0 * loglik - 2.0 * n_params as f64
}

/// `2 loglik - p log n`.
pub fn bic_from(loglik: f64, n_params: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "BIC needs a positive sample size".into(),
        ));
    }
    Ok(bic_with_log_n(loglik, n_params, (n as f64).ln()))
}

/// BIC with the penalty's `log n` supplied directly.
pub fn bic_with_log_n(loglik: f64, n_params: usize, log_n: f64) -> f64 {
    2.0 * loglik - n_params as f64 * log_n
}

/// AIC of a fit, counting every beta, rho and sigma.
pub fn aic(fit: &ArxFit) -> f64 {
    aic_from(fit.loglik_max, fit.n_params())
}

/// BIC of a fit with sample size `n`, normally `fit.n_effective`.
pub fn bic(fit: &ArxFit, n: usize) -> Result<f64> {
    bic_from(fit.loglik_max, fit.n_params(), n)
}

/// One row of an information-criterion table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub label: String,
    pub n_params: usize,
    pub n_effective: usize,
    pub loglik_max: f64,
    pub aic: f64,
    pub bic: f64,
}

fn quick_options(align: &RowAlignment) -> FitOptions {
    FitOptions {
        require_stationary: false,
        compute_vcov: false,
        alignment: Some(align.clone()),
        warm_start: None,
    }
}

/// AIC and BIC for every candidate, all fitted on the rows usable by the
/// largest of them so the scores are comparable.
pub fn score_table(candidates: &[ArxSpec], frame: &Frame) -> Result<Vec<ScoreRow>> {
    let align = RowAlignment::covering(candidates);
    let opts = quick_options(&align);
    candidates
        .par_iter()
        .map(|spec| {
            let f = fit_with(spec, frame, &opts)?;
            Ok(ScoreRow {
                label: spec.label(),
                n_params: f.n_params(),
                n_effective: f.n_effective,
                loglik_max: f.loglik_max,
                aic: aic(&f),
                bic: bic(&f, f.n_effective)?,
            })
        })
        .collect()
}

/// AIC differences against a baseline, refitted on every growing sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRace {
    pub baseline: String,
    pub years: Vec<i32>,
    pub labels: Vec<String>,
    /// `diffs[i][c]`: AIC(candidate c) - AIC(baseline) on data up to `years[i]`.
    pub diffs: Vec<Vec<Option<f64>>>,
}

impl ScoreRace {
    pub fn column(&self, label: &str) -> Option<Vec<Option<f64>>> {
        let c = self.labels.iter().position(|l| l == label)?;
        Some(self.diffs.iter().map(|row| row[c]).collect())
    }

    /// One series per candidate; failed fits are masked.
    pub fn to_frame(&self) -> Result<Frame> {
        let start = *self
            .years
            .first()
            .ok_or_else(|| Error::InvalidInput("empty race".into()))?;
        let series = self
            .labels
            .iter()
            .enumerate()
            .map(|(c, l)| {
                let col: Vec<Option<f64>> = self.diffs.iter().map(|row| row[c]).collect();
                Series::from_options(l.clone(), start, &col)
            })
            .collect::<Result<Vec<_>>>()?;
        Frame::new(series)
    }
}

/// Sequential AIC race: for each year from `start_year` to the end of the
/// frame, every candidate and the baseline are refitted on data up to that
/// year. Fits that fail leave a masked cell.
pub fn sequential_scores(
    candidates: &[ArxSpec],
    frame: &Frame,
    baseline: &ArxSpec,
    start_year: i32,
) -> Result<ScoreRace> {
    if start_year < frame.start_year() || start_year > frame.end_year() {
        return Err(Error::InvalidInput(format!(
            "race start {start_year} outside {}..={}",
            frame.start_year(),
            frame.end_year()
        )));
    }
    let align = RowAlignment::covering(candidates.iter().chain(std::iter::once(baseline)));
    let years: Vec<i32> = (start_year..=frame.end_year()).collect();
    let frames = years
        .iter()
        .map(|&y| frame.up_to(y))
        .collect::<Result<Vec<_>>>()?;

    let path = |spec: &ArxSpec| -> Vec<Option<f64>> {
        let mut opts = quick_options(&align);
        frames
            .iter()
            .map(|fr| match fit_with(spec, fr, &opts) {
                Ok(f) => {
                    opts.warm_start = Some(f.rho.clone());
                    Some(aic(&f))
                }
                Err(_) => None,
            })
            .collect()
    };
    let base = path(baseline);
    let cols: Vec<Vec<Option<f64>>> = candidates
        .par_iter()
        .map(|c| if c == baseline { base.clone() } else { path(c) })
        .collect();
    let diffs = (0..years.len())
        .map(|i| {
            cols.iter()
                .map(|col| match (col[i], base[i]) {
                    (Some(a), Some(b)) => Some(a - b),
                    _ => None,
                })
                .collect()
        })
        .collect();
    Ok(ScoreRace {
        baseline: baseline.label(),
        years,
        labels: candidates.iter().map(|c| c.label()).collect(),
        diffs,
    })
}

/// Threshold for a threshold-probability focus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Level(f64),
    /// Mean of the observed response series.
    ResponseMean,
}

/// Scalar quantity whose estimation accuracy drives the FIC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FocusSpec {
    /// Forecast mean `h` years past the last observed response.
    Prediction { horizon: usize },
    /// `xi_a - xi_b`, the difference of expected levels, divided by the
    /// stationary sd of the error process when `scaled`.
    SlopeContrast {
        year_a: i32,
        year_b: i32,
        scaled: bool,
    },
    /// Probability that the response stays below the threshold in all of
    /// the listed future years.
    ThresholdProbability {
        threshold: Threshold,
        years: Vec<i32>,
    },
}

impl FocusSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FocusSpec::Prediction { horizon } if *horizon == 0 => Err(Error::InvalidInput(
                "prediction focus needs horizon >= 1".into(),
            )),
            FocusSpec::SlopeContrast { year_a, year_b, .. } if year_a == year_b => Err(
                Error::InvalidInput("slope focus needs two distinct years".into()),
            ),
            FocusSpec::ThresholdProbability { threshold, years } => {
                if years.is_empty() {
                    return Err(Error::InvalidInput(
                        "threshold focus needs at least one year".into(),
                    ));
                }
                let mut sorted = years.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != years.len() {
                    return Err(Error::InvalidInput(
                        "threshold focus years must be distinct".into(),
                    ));
                }
                match threshold {
                    Threshold::Level(l) if l.is_nan() => {
                        Err(Error::InvalidInput("threshold is NaN".into()))
                    }
                    _ => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// Parses `pred:h`, `slope:y1,y2[,unscaled]` or `thresh:level,y1[,y2...]`,
    /// where `level` may be `mean`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("bad focus '{s}'"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        let year = |p: &str| p.parse::<i32>().map_err(|_| bad());
        let focus = match kind.trim() {
            "pred" => FocusSpec::Prediction {
                horizon: rest.trim().parse().map_err(|_| bad())?,
            },
            "slope" => {
                let scaled = match parts.len() {
                    2 => true,
                    3 if parts[2] == "unscaled" => false,
                    3 if parts[2] == "scaled" => true,
                    _ => return Err(bad()),
                };
                FocusSpec::SlopeContrast {
                    year_a: year(parts[0])?,
                    year_b: year(parts[1])?,
                    scaled,
                }
            }
            "thresh" => {
                if parts.len() < 2 {
                    return Err(bad());
                }
                let threshold = match parts[0] {
                    "mean" => Threshold::ResponseMean,
                    v => Threshold::Level(v.parse().map_err(|_| bad())?),
                };
                FocusSpec::ThresholdProbability {
                    threshold,
                    years: parts[1..].iter().map(|p| year(p)).collect::<Result<_>>()?,
                }
            }
            _ => return Err(bad()),
        };
        focus.validate()?;
        Ok(focus)
    }
}

impl fmt::Display for FocusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FocusSpec::Prediction { horizon } => write!(f, "pred:{horizon}"),
            FocusSpec::SlopeContrast {
                year_a,
                year_b,
                scaled,
            } => {
                write!(f, "slope:{year_a},{year_b}")?;
                if !scaled {
                    write!(f, ",unscaled")?;
                }
                Ok(())
            }
            FocusSpec::ThresholdProbability { threshold, years } => {
                match threshold {
                    Threshold::Level(l) => write!(f, "thresh:{l}")?,
                    Threshold::ResponseMean => write!(f, "thresh:mean")?,
                }
                for y in years {
                    write!(f, ",{y}")?;
                }
                Ok(())
            }
        }
    }
}

/// Observed mean of the response, the value `thresh:mean` resolves to.
pub fn response_mean(frame: &Frame, response: &str) -> Result<f64> {
    let s = frame.get(response)?;
    let n = s.n_observed();
    if n == 0 {
        return Err(Error::MissingValue(format!(
            "{response} has no observations"
        )));
    }
    Ok(s.observed().map(|(_, v)| v).sum::<f64>() / n as f64)
}

/// A focus bound to a model and data, evaluable at any parameter value.
enum FocusFn {
    Prediction {
        basis: PredictionBasis,
    },
    Slope {
        xa: Vec<f64>,
        xb: Vec<f64>,
        scaled: bool,
    },
    Threshold {
        basis: PredictionBasis,
        idx: Vec<usize>,
        level: f64,
    },
}

impl FocusFn {
    fn new(
        spec: &ArxSpec,
        frame: &Frame,
        focus: &FocusSpec,
        future: Option<&Frame>,
    ) -> Result<Self> {
        focus.validate()?;
        Ok(match focus {
            FocusSpec::Prediction { horizon } => FocusFn::Prediction {
                basis: PredictionBasis::new(spec, frame, *horizon, future)?,
            },
            FocusSpec::SlopeContrast {
                year_a,
                year_b,
                scaled,
            } => FocusFn::Slope {
                xa: design_row(spec, frame, future, *year_a)?,
                xb: design_row(spec, frame, future, *year_b)?,
                scaled: *scaled,
            },
            FocusSpec::ThresholdProbability { threshold, years } => {
                let level = match threshold {
                    Threshold::Level(l) => *l,
                    Threshold::ResponseMean => response_mean(frame, &spec.response)?,
                };
                let probe = PredictionBasis::new(spec, frame, 1, future)?;
                let mut idx = Vec::with_capacity(years.len());
                for &y in years {
                    if y <= probe.origin {
                        return Err(Error::InvalidInput(format!(
                            "threshold year {y} is not after the last observation {}",
                            probe.origin
                        )));
                    }
                    idx.push((y - probe.origin - 1) as usize);
                }
                let h = idx.iter().max().unwrap() + 1;
                FocusFn::Threshold {
                    basis: PredictionBasis::new(spec, frame, h, future)?,
                    idx,
                    level,
                }
            }
        })
    }

    fn eval(&self, p: &ArxParams) -> Result<f64> {
        match self {
            FocusFn::Prediction { basis } => Ok(*basis.means(p).last().unwrap()),
            FocusFn::Slope { xa, xb, scaled } => {
                let xi = |x: &[f64]| x.iter().zip(&p.beta).map(|(a, b)| a * b).sum::<f64>();
                let diff = xi(xa) - xi(xb);
                if !scaled {
                    return Ok(diff);
                }
                let g = ar_autocovariance(&p.rho, p.sigma, 0)
                    .ok_or_else(|| Error::NonStationary(p.rho.clone()))?;
                Ok(diff / g[0].sqrt())
            }
            FocusFn::Threshold { basis, idx, level } => {
                let mean = basis.means(p);
                let cov = basis.covariance(p);
                let m: Vec<f64> = idx.iter().map(|&i| mean[i]).collect();
                let c = DMatrix::from_fn(idx.len(), idx.len(), |a, b| cov[(idx[a], idx[b])]);
                Ok(mvn_lower_prob(&m, &c, *level))
            }
        }
    }

    /// Central-difference gradient over `(beta, rho, sigma)`.
    fn gradient(&self, spec: &ArxSpec, p: &ArxParams) -> Result<Vec<f64>> {
        let theta = p.to_vec();
        let last = theta.len() - 1;
        (0..theta.len())
            .map(|i| {
                let mut h = FD_REL_STEP * theta[i].abs().max(1.0);
                if i == last {
                    h = h.min(0.5 * theta[i]);
                }
                let at = |d: f64| {
                    let mut t = theta.clone();
                    t[i] += d;
                    self.eval(&ArxParams::from_slice(spec, &t)?)
                };
                Ok((at(h)? - at(-h)?) / (2.0 * h))
            })
            .collect()
    }
}

/// Plug-in focus estimate at the fitted parameters.
pub fn focus_estimate(fit: &ArxFit, frame: &Frame, focus: &FocusSpec) -> Result<f64> {
    focus_estimate_with(fit, frame, focus, None)
}

/// As [`focus_estimate`], reading future covariates from `future` first.
pub fn focus_estimate_with(
    fit: &ArxFit,
    frame: &Frame,
    focus: &FocusSpec,
    future: Option<&Frame>,
) -> Result<f64> {
    FocusFn::new(&fit.spec, frame, focus, future)?.eval(&fit.params())
}

/// Focus estimate with its delta-method variance `g' V g`.
pub fn focus_with_variance(
    fit: &ArxFit,
    frame: &Frame,
    focus: &FocusSpec,
    future: Option<&Frame>,
) -> Result<(f64, f64)> {
    let f = FocusFn::new(&fit.spec, frame, focus, future)?;
    let p = fit.params();
    let est = f.eval(&p)?;
    let g = DVector::from_vec(f.gradient(&fit.spec, &p)?);
    let v = fit.vcov_matrix()?;
    Ok((est, (g.transpose() * v * &g)[(0, 0)].max(0.0)))
}

/// FIC summary for one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FicEntry {
    pub label: String,
    pub spec: ArxSpec,
    pub n_params: usize,
    pub focus_estimate: f64,
    pub variance: f64,
    pub bias: f64,
    pub sq_bias: f64,
    pub fic_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCandidate {
    pub label: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FicReport {
    pub focus: FocusSpec,
    pub wide: String,
    /// Candidates sorted by ascending score.
    pub entries: Vec<FicEntry>,
    pub failed: Vec<FailedCandidate>,
}

impl FicReport {
    pub fn best(&self) -> Option<&FicEntry> {
        self.entries.first()
    }

    pub fn entry(&self, label: &str) -> Option<&FicEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Plot data: score on the x-axis, focus estimate on the y-axis.
    pub fn write_plot_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["fic_score", "focus_estimate"])?;
        for e in &self.entries {
            w.write_record([
                crate::frame::format_number(e.fic_score),
                crate::frame::format_number(e.focus_estimate),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

/// Focused information criterion over nested candidates.
pub fn fic(
    candidates: &[ArxSpec],
    wide: &ArxSpec,
    frame: &Frame,
    focus: &FocusSpec,
) -> Result<FicReport> {
    fic_with(candidates, wide, frame, focus, None)
}

/// As [`fic`], reading future covariates from `future` first.
pub fn fic_with(
    candidates: &[ArxSpec],
    wide: &ArxSpec,
    frame: &Frame,
    focus: &FocusSpec,
    future: Option<&Frame>,
) -> Result<FicReport> {
    focus.validate()?;
    for c in candidates {
        if !c.is_nested_in(wide) {
            return Err(Error::NotNested {
                candidate: c.label(),
            });
        }
    }
    let align = RowAlignment::covering(std::iter::once(wide).chain(candidates));
    let opts = FitOptions {
        alignment: Some(align),
        ..FitOptions::default()
    };
    let wide_fit = fit_with(wide, frame, &opts)?;
    let (mu_wide, var_wide) = focus_with_variance(&wide_fit, frame, focus, future)?;

    let results: Vec<std::result::Result<FicEntry, FailedCandidate>> = candidates
        .par_iter()
        .map(|spec| {
            let run = || -> Result<FicEntry> {
                let (mu, var) = if spec == wide {
                    (mu_wide, var_wide)
                } else {
                    let f = fit_with(spec, frame, &opts)?;
                    focus_with_variance(&f, frame, focus, future)?
                };
                let bias = mu_wide - mu;
                let correction = (var_wide - var).max(0.0);
                let sq_bias = (bias * bias - correction).max(0.0);
                Ok(FicEntry {
                    label: spec.label(),
                    spec: spec.clone(),
                    n_params: spec.n_params(),
                    focus_estimate: mu,
                    variance: var,
                    bias,
                    sq_bias,
                    fic_score: (var + sq_bias).sqrt(),
                })
            };
            run().map_err(|e| FailedCandidate {
                label: spec.label(),
                error: e.to_string(),
            })
        })
        .collect();

    let mut entries = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(e) => entries.push(e),
            Err(f) => failed.push(f),
        }
    }
    entries.sort_by(|a, b| {
        a.fic_score
            .total_cmp(&b.fic_score)
            .then_with(|| a.label.cmp(&b.label))
    });
    Ok(FicReport {
        focus: focus.clone(),
        wide: wide.label(),
        entries,
        failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::argauss::{fit, forecast, simulate_with};
    use approx::assert_abs_diff_eq;

    fn sim_frame(spec: &ArxSpec, p: &ArxParams, n: usize, seed: u64) -> Frame {
        let blank = Frame::new(vec![
            Series::new(&spec.response, 1900, vec![0.0; n]).unwrap()
        ])
        .unwrap();
        Frame::new(vec![simulate_with(spec, p, &blank, n, seed).unwrap()]).unwrap()
    }

    #[test]
    fn criterion_arithmetic() {
        assert_eq!(aic_from(100.0, 3), 194.0);
        assert_eq!(aic_from(50.0, 4) - aic_from(50.0, 5), 2.0);
        assert_abs_diff_eq!(
            bic_from(100.0, 3, 100).unwrap(),
            200.0 - 3.0 * 100f64.ln(),
            epsilon = 1e-12
        );
        assert_eq!(bic_from(100.0, 0, 17).unwrap(), 200.0);
        assert!(bic_from(100.0, 3, 0).is_err());
    }

    #[test]
    fn aic_bic_gap_is_penalty_difference() {
        let spec = ArxSpec::ar("z", 2);
        let fr = sim_frame(
            &spec,
            &ArxParams::new(vec![1.0], vec![0.5, -0.2], 1.0),
            120,
            4,
        );
        let f = fit(&spec, &fr).unwrap();
        let n = f.n_effective as f64;
        let gap = aic(&f) - bic(&f, f.n_effective).unwrap();
        assert_abs_diff_eq!(gap, 4.0 * (n.ln() - 2.0), epsilon = 1e-9);
    }

    #[test]
    fn focus_parsing() {
        assert_eq!(
            FocusSpec::parse("pred:3").unwrap(),
            FocusSpec::Prediction { horizon: 3 }
        );
        assert_eq!(
            FocusSpec::parse("slope:1980,2000").unwrap(),
            FocusSpec::SlopeContrast {
                year_a: 1980,
                year_b: 2000,
                scaled: true
            }
        );
        assert_eq!(
            FocusSpec::parse("thresh:mean,2013,2014").unwrap(),
            FocusSpec::ThresholdProbability {
                threshold: Threshold::ResponseMean,
                years: vec![2013, 2014]
            }
        );
        for s in ["thresh:5.89,2013", "slope:1980,2000,unscaled", "pred:10"] {
            assert_eq!(FocusSpec::parse(s).unwrap().to_string(), s);
        }
        for s in [
            "pred:0",
            "slope:1980,1980",
            "thresh:3.0",
            "thresh:1,2013,2013",
            "nope:1",
            "pred",
        ] {
            assert!(FocusSpec::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn slope_is_zero_without_trend() {
        let spec = ArxSpec::ar("z", 0);
        let fr = sim_frame(&spec, &ArxParams::new(vec![3.0], vec![], 1.0), 50, 1);
        let f = fit(&spec, &fr).unwrap();
        for (a, b) in [(1900, 1920), (1980, 2000), (2100, 1850)] {
            let focus = FocusSpec::SlopeContrast {
                year_a: a,
                year_b: b,
                scaled: true,
            };
            assert_eq!(focus_estimate(&f, &fr, &focus).unwrap(), 0.0);
        }
    }

    #[test]
    fn threshold_limits_and_one_step_prediction() {
        let spec = ArxSpec::ar("z", 1);
        let fr = sim_frame(&spec, &ArxParams::new(vec![0.0], vec![0.6], 1.0), 80, 2);
        let f = fit(&spec, &fr).unwrap();
        let years = vec![1980, 1981];
        let hi = FocusSpec::ThresholdProbability {
            threshold: Threshold::Level(1e12),
            years: years.clone(),
        };
        let lo = FocusSpec::ThresholdProbability {
            threshold: Threshold::Level(-1e12),
            years,
        };
        assert_abs_diff_eq!(focus_estimate(&f, &fr, &hi).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(focus_estimate(&f, &fr, &lo).unwrap(), 0.0, epsilon = 1e-12);
        let past = FocusSpec::ThresholdProbability {
            threshold: Threshold::Level(0.0),
            years: vec![1979],
        };
        assert!(focus_estimate(&f, &fr, &past).is_err());

        let mu = focus_estimate(&f, &fr, &FocusSpec::Prediction { horizon: 1 }).unwrap();
        assert_eq!(mu, forecast(&f, &fr, 1).unwrap()[0].mean);
    }

    #[test]
    fn wide_alone_has_no_bias() {
        let wide = ArxSpec::ar("z", 2).with_trend();
        let fr = sim_frame(
            &wide,
            &ArxParams::new(vec![1.0, 0.01], vec![0.4, 0.1], 1.0),
            100,
            9,
        );
        let r = fic(
            std::slice::from_ref(&wide),
            &wide,
            &fr,
            &FocusSpec::Prediction { horizon: 3 },
        )
        .unwrap();
        let e = &r.entries[0];
        assert_eq!(e.sq_bias, 0.0);
        assert_eq!(e.fic_score, e.variance.sqrt());
    }

    #[test]
    fn non_nested_candidate_is_rejected() {
        let wide = ArxSpec::ar("z", 1);
        let fr = sim_frame(&wide, &ArxParams::new(vec![0.0], vec![0.3], 1.0), 60, 1);
        let r = fic(
            &[ArxSpec::ar("z", 2)],
            &wide,
            &fr,
            &FocusSpec::Prediction { horizon: 1 },
        );
        assert!(matches!(r, Err(Error::NotNested { .. })));
    }

    #[test]
    fn race_against_itself_is_zero() {
        let spec = ArxSpec::ar("z", 1);
        let fr = sim_frame(&spec, &ArxParams::new(vec![0.0], vec![0.3], 1.0), 40, 3);
        let race = sequential_scores(std::slice::from_ref(&spec), &fr, &spec, 1920).unwrap();
        assert_eq!(race.years.len(), 20);
        assert!(race.diffs.iter().all(|row| row[0] == Some(0.0)));
        assert_eq!(race.to_frame().unwrap().len(), 20);
    }
}
