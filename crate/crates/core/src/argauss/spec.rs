use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest autoregressive order the engine fits.
pub const MAX_AR_ORDER: usize = 6;

/// Trend covariate is `year - TREND_ORIGIN`.
pub const TREND_ORIGIN: i32 = 1980;

/// A covariate series entering at a lag, i.e. as `x_{t - lag}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Regressor {
    pub name: String,
    pub lag: usize,
}

impl Regressor {
    pub fn new(name: impl Into<String>, lag: usize) -> Self {
        Self {
            name: name.into(),
            lag,
        }
    }

    /// Parses `name:lag` (lag defaults to 0).
    pub fn parse(s: &str) -> Result<Self> {
        let (name, lag) = match s.rsplit_once(':') {
            Some((n, l)) => (
                n,
                l.trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad lag in regressor {s:?}")))?,
            ),
            None => (s, 0),
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::InvalidInput(format!(
                "empty regressor name in {s:?}"
            )));
        }
        Ok(Self::new(name, lag))
    }
}

impl fmt::Display for Regressor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.name, self.lag)
    }
}

/// Structure of a Gaussian regression model with autoregressive errors:
///
/// `z_t = x_t' beta + eps_t`, `eps_t = rho_1 eps_{t-1} + ... + rho_k eps_{t-k} + sigma * delta_t`.
///
/// Coefficients are ordered intercept, trend, then regressors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArxSpec {
    pub response: String,
    pub regressors: Vec<Regressor>,
    pub include_intercept: bool,
    pub include_linear_trend: bool,
    pub ar_order: usize,
}

impl ArxSpec {
    /// Intercept plus AR(k) errors, no covariates.
    pub fn ar(response: impl Into<String>, ar_order: usize) -> Self {
        Self {
            response: response.into(),
            regressors: Vec::new(),
            include_intercept: true,
            include_linear_trend: false,
            ar_order,
        }
    }

    pub fn with_trend(mut self) -> Self {
        self.include_linear_trend = true;
        self
    }

    pub fn without_intercept(mut self) -> Self {
        self.include_intercept = false;
        self
    }

    pub fn with_regressor(mut self, name: impl Into<String>, lag: usize) -> Self {
        self.regressors.push(Regressor::new(name, lag));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.ar_order > MAX_AR_ORDER {
            return Err(Error::InvalidInput(format!(
                "ar order {} exceeds the engine cap of {MAX_AR_ORDER}",
                self.ar_order
            )));
        }
        let unique: BTreeSet<_> = self.regressors.iter().collect();
        if unique.len() != self.regressors.len() {
            return Err(Error::InvalidInput("duplicate regressor".into()));
        }
        Ok(())
    }

    /// Number of regression coefficients.
    pub fn n_beta(&self) -> usize {
        self.include_intercept as usize + self.include_linear_trend as usize + self.regressors.len()
    }

    /// All estimated parameters: coefficients, AR terms and sigma.
    pub fn n_params(&self) -> usize {
        self.n_beta() + self.ar_order + 1
    }

    pub fn beta_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.n_beta());
        if self.include_intercept {
            names.push("intercept".to_string());
        }
        if self.include_linear_trend {
            names.push("trend".to_string());
        }
        names.extend(self.regressors.iter().map(Regressor::to_string));
        names
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names = self.beta_names();
        names.extend((1..=self.ar_order).map(|j| format!("rho{j}")));
        names.push("sigma".into());
        names
    }

    /// `true` when every term of `self` also appears in `wide`.
    pub fn is_nested_in(&self, wide: &ArxSpec) -> bool {
        self.response == wide.response
            && self.ar_order <= wide.ar_order
            && (!self.include_intercept || wide.include_intercept)
            && (!self.include_linear_trend || wide.include_linear_trend)
            && self.regressors.iter().all(|r| wide.regressors.contains(r))
    }

    /// Compact descriptor, e.g. `ar2+trend+kola:1`.
    pub fn label(&self) -> String {
        let mut parts = vec![format!("ar{}", self.ar_order)];
        if self.include_linear_trend {
            parts.push("trend".into());
        }
        if !self.include_intercept {
            parts.push("nointercept".into());
        }
        parts.extend(self.regressors.iter().map(Regressor::to_string));
        parts.join("+")
    }

    /// Parses a descriptor produced by [`ArxSpec::label`]. Tokens are joined
    /// by `+`: `arK`, `trend`, `nointercept`, `name:lag`.
    pub fn parse(response: &str, descriptor: &str) -> Result<Self> {
        let mut spec = ArxSpec::ar(response, 0);
        for tok in descriptor
            .split('+')
            .map(str::trim)
            .filter(|t| !t.is_empty())
        {
            match tok {
                "trend" => spec.include_linear_trend = true,
                "nointercept" => spec.include_intercept = false,
                "intercept" => spec.include_intercept = true,
                t if t.starts_with("ar")
                    && t[2..].chars().all(|c| c.is_ascii_digit())
                    && t.len() > 2 =>
                {
                    spec.ar_order = t[2..].parse().unwrap();
                }
                t => spec.regressors.push(Regressor::parse(t)?),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Every spec nested in `self`: all covariate subsets, trend in/out
    /// (when present here) and AR orders `0..=ar_order`.
    pub fn submodels(&self) -> Vec<ArxSpec> {
        let m = self.regressors.len();
        let trends: &[bool] = if self.include_linear_trend {
            &[false, true]
        } else {
            &[false]
        };
        let mut out = Vec::new();
        for k in 0..=self.ar_order {
            for &trend in trends {
                for bits in 0..(1u32 << m) {
                    out.push(ArxSpec {
                        response: self.response.clone(),
                        regressors: (0..m)
                            .filter(|i| bits & (1 << i) != 0)
                            .map(|i| self.regressors[i].clone())
                            .collect(),
                        include_intercept: self.include_intercept,
                        include_linear_trend: trend,
                        ar_order: k,
                    });
                }
            }
        }
        out
    }
}

impl fmt::Display for ArxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}~{}", self.response, self.label())
    }
}

/// Parameter values for a given [`ArxSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArxParams {
    pub beta: Vec<f64>,
    pub rho: Vec<f64>,
    pub sigma: f64,
}

impl ArxParams {
    pub fn new(beta: Vec<f64>, rho: Vec<f64>, sigma: f64) -> Self {
        Self { beta, rho, sigma }
    }

    /// Flattened as `(beta, rho, sigma)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.beta.clone();
        v.extend(&self.rho);
        v.push(self.sigma);
        v
    }

    pub fn from_slice(spec: &ArxSpec, theta: &[f64]) -> Result<Self> {
        let nb = spec.n_beta();
        if theta.len() != spec.n_params() {
            return Err(Error::InvalidInput(format!(
                "expected {} parameters, got {}",
                spec.n_params(),
                theta.len()
            )));
        }
        Ok(Self {
            beta: theta[..nb].to_vec(),
            rho: theta[nb..nb + spec.ar_order].to_vec(),
            sigma: theta[nb + spec.ar_order],
        })
    }

    pub fn check(&self, spec: &ArxSpec) -> Result<()> {
        if self.beta.len() != spec.n_beta() || self.rho.len() != spec.ar_order {
            return Err(Error::InvalidInput(format!(
                "parameters do not match spec {spec}: {} coefficients, {} AR terms",
                self.beta.len(),
                self.rho.len()
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_round_trip() {
        let spec = ArxSpec::ar("hsi", 2)
            .with_trend()
            .with_regressor("kola", 1)
            .with_regressor("capelin", 0);
        assert_eq!(spec.label(), "ar2+trend+kola:1+capelin:0");
        assert_eq!(ArxSpec::parse("hsi", &spec.label()).unwrap(), spec);
        assert_eq!(spec.n_params(), 4 + 2 + 1);
        assert!(ArxSpec::parse("hsi", "ar7").is_err());
    }

    #[test]
    fn nesting() {
        let wide = ArxSpec::ar("z", 2).with_trend().with_regressor("a", 1);
        assert!(ArxSpec::ar("z", 1).is_nested_in(&wide));
        assert!(ArxSpec::ar("z", 0)
            .with_regressor("a", 1)
            .is_nested_in(&wide));
        assert!(!ArxSpec::ar("z", 3).is_nested_in(&wide));
        assert!(!ArxSpec::ar("z", 0)
            .with_regressor("a", 0)
            .is_nested_in(&wide));
        let subs = wide.submodels();
        assert_eq!(subs.len(), 3 * 2 * 2);
        assert!(subs.iter().all(|s| s.is_nested_in(&wide)));
        assert!(subs.contains(&wide));
    }
}
