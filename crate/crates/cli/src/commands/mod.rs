use std::fmt;
use std::path::{Path, PathBuf};

use hjortic::frame::load_csv;
use hjortic::modelsel::FocusSpec;
use hjortic::{ArxSpec, Frame, Regressor};

use crate::args::{DataArgs, FocusArgs, ModelArgs};
use crate::output::Output;

pub mod confid;
pub mod copula;
pub mod model;
pub mod monitor;
pub mod synth;

/// Why a run stopped: bad arguments (exit 2) or a failed computation (exit 1).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Run(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

impl From<hjortic::Error> for Failure {
    fn from(e: hjortic::Error) -> Self {
        Failure::Run(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.into())
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Settings shared by every subcommand.
pub struct Ctx {
    pub out: PathBuf,
    pub seed: u64,
}

impl Ctx {
    pub fn output(&self, stem: &str) -> Result<Output, Failure> {
        Ok(Output::new(&self.out, stem)?)
    }
}

impl ModelArgs {
    pub fn spec(&self) -> Result<ArxSpec, Failure> {
        let mut spec = ArxSpec::ar(&self.data.response, self.ar_order);
        spec.include_linear_trend = self.trend && !self.no_trend;
        spec.include_intercept = !self.no_intercept;
        for c in &self.covariates {
            spec.regressors
                .push(Regressor::parse(c).map_err(|e| usage(e.to_string()))?);
        }
        spec.validate().map_err(|e| usage(e.to_string()))?;
        Ok(spec)
    }

    pub fn load(&self) -> Result<(ArxSpec, Frame), Failure> {
        let spec = self.spec()?;
        let frame = load_for(&self.data, std::slice::from_ref(&spec))?;
        Ok((spec, frame))
    }
}

/// Parses candidate descriptors for `response`.
pub fn parse_specs(response: &str, descriptors: &[String]) -> Result<Vec<ArxSpec>, Failure> {
    descriptors
        .iter()
        .map(|d| ArxSpec::parse(response, d).map_err(|e| usage(format!("descriptor {d:?}: {e}"))))
        .collect()
}

/// Loads the response and every covariate the specs mention.
pub fn load_for(data: &DataArgs, specs: &[ArxSpec]) -> Result<Frame, Failure> {
    let mut cols = vec![data.response.as_str()];
    for s in specs {
        for r in &s.regressors {
            if !cols.contains(&r.name.as_str()) {
                cols.push(&r.name);
            }
        }
    }
    read_frame(&data.input, &data.year_column, &cols)
}

pub fn read_frame(path: &Path, year_column: &str, cols: &[&str]) -> Result<Frame, Failure> {
    load_csv(path, year_column, cols).map_err(Failure::from)
}

/// Covariate values for forecast years, if a file was given.
pub fn load_future(
    path: Option<&Path>,
    year_column: &str,
    specs: &[ArxSpec],
) -> Result<Option<Frame>, Failure> {
    let Some(path) = path else { return Ok(None) };
    let mut cols: Vec<&str> = Vec::new();
    for s in specs {
        for r in &s.regressors {
            if !cols.contains(&r.name.as_str()) {
                cols.push(&r.name);
            }
        }
    }
    read_frame(path, year_column, &cols).map(Some)
}

impl FocusArgs {
    pub fn parse(&self) -> Result<Option<FocusSpec>, Failure> {
        let Some(raw) = &self.focus else {
            if self.threshold.is_some() {
                return Err(usage("--threshold needs a thresh: focus"));
            }
            return Ok(None);
        };
        let text = match (&self.threshold, raw.strip_prefix("thresh:")) {
            (Some(t), Some(years)) => format!("thresh:{t},{years}"),
            (Some(_), None) => return Err(usage("--threshold applies only to a thresh: focus")),
            (None, _) => raw.clone(),
        };
        FocusSpec::parse(&text)
            .map(Some)
            .map_err(|e| usage(format!("focus {raw:?}: {e}")))
    }

    pub fn require(&self) -> Result<FocusSpec, Failure> {
        self.parse()?.ok_or_else(|| usage("--focus is required"))
    }
}

/// Comma-separated floats.
pub fn parse_floats(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad number {t:?} in {what}")))
        })
        .collect()
}

pub fn check_level(level: f64) -> Result<(), Failure> {
    if level > 0.0 && level < 1.0 {
        Ok(())
    } else {
        Err(usage(format!("level {level} must lie in (0, 1)")))
    }
}
