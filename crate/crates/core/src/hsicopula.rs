//! Liver indices and the gamma-margin Gaussian copula for (liver, fish) weights.
//!
//! Margin 1 is liver weight, margin 2 is total fish weight, both in kg.
//! Gamma margins use shape `a` and rate `b`, so the mean is `a / b`.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{digamma, gamma_cdf, gamma_quantile, normal_cdf, normal_quantile, trigamma};
use crate::error::{Error, Result};
use crate::frame::format_number;

/// Minimum sample size accepted by [`fit_copula`].
pub const MIN_FIT_PAIRS: usize = 30;

/// Minimum replicate count accepted by [`translation`].
pub const MIN_TRANSLATION_REPS: usize = 100;

/// Paired liver and total weights, one entry per specimen.
#[derive(Debug, Clone, PartialEq)]
pub struct FishPairs {
    liver_kg: Vec<f64>,
    fish_kg: Vec<f64>,
}

impl FishPairs {
    pub fn new(liver_kg: Vec<f64>, fish_kg: Vec<f64>) -> Result<Self> {
        if liver_kg.len() != fish_kg.len() {
            return Err(Error::InvalidInput(format!(
                "{} liver weights but {} fish weights",
                liver_kg.len(),
                fish_kg.len()
            )));
        }
        for (i, (&x, &y)) in liver_kg.iter().zip(&fish_kg).enumerate() {
            if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "specimen {i}: weights must be positive and finite, got ({x}, {y})"
                )));
            }
            if x >= y {
                return Err(Error::InvalidInput(format!(
                    "specimen {i}: liver weight {x} is not below fish weight {y}"
                )));
            }
        }
        Ok(FishPairs { liver_kg, fish_kg })
    }

    pub fn len(&self) -> usize {
        self.liver_kg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.liver_kg.is_empty()
    }

    pub fn liver_kg(&self) -> &[f64] {
        &self.liver_kg
    }

    pub fn fish_kg(&self) -> &[f64] {
        &self.fish_kg
    }

    /// Reads a two-column CSV with a header row: liver weight, fish weight.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 {
            return Err(Error::InvalidInput("pair CSV needs two columns".into()));
        }
        let (mut liver, mut fish) = (Vec::new(), Vec::new());
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let cell = |j: usize| -> Result<f64> {
                let raw = rec.get(j).unwrap_or("");
                raw.parse().map_err(|_| Error::BadCell {
                    row: row + 1,
                    column: headers[j].to_string(),
                    value: raw.to_string(),
                })
            };
            liver.push(cell(0)?);
            fish.push(cell(1)?);
        }
        FishPairs::new(liver, fish)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        FishPairs::read_csv(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["liver_kg", "fish_kg"])?;
        for (x, y) in self.liver_kg.iter().zip(&self.fish_kg) {
            w.write_record([format_number(*x), format_number(*y)])?;
        }
        flush(w)
    }
}

fn flush<W: Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|source| Error::Io {
        path: "<csv writer>".into(),
        source,
    })
}

/// Five-parameter bivariate gamma model: gamma margins joined by a Gaussian
/// copula with normal-scores correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopulaModel {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub rho: f64,
}

impl CopulaModel {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64, rho: f64) -> Result<Self> {
        let m = CopulaModel {
            a1,
            b1,
            a2,
            b2,
            rho,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("a1", self.a1),
            ("b1", self.b1),
            ("a2", self.a2),
            ("b2", self.b2),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidInput(format!(
                "rho must lie in (-1, 1), got {}",
                self.rho
            )));
        }
        Ok(())
    }

    /// Mean and standard deviation of margin 1 (liver).
    pub fn liver_moments(&self) -> (f64, f64) {
        (self.a1 / self.b1, self.a1.sqrt() / self.b1)
    }

    /// Mean and standard deviation of margin 2 (fish).
    pub fn fish_moments(&self) -> (f64, f64) {
        (self.a2 / self.b2, self.a2.sqrt() / self.b2)
    }

    /// Draws `n` raw (liver, fish) pairs from the model.
    ///
    /// The pairs are not checked against `liver < fish`, so they can be fed
    /// to [`fit_margins`] even when the margins overlap.
    pub fn sample(&self, n: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let (x, y) = self.draw(&mut rng);
            xs.push(x);
            ys.push(y);
        }
        Ok((xs, ys))
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.sample(StandardNormal);
        let e: f64 = rng.sample(StandardNormal);
        let v = self.rho * u + (1.0 - self.rho * self.rho).sqrt() * e;
        (
            gamma_quantile(uniform_of(u), self.a1, self.b1),
            gamma_quantile(uniform_of(v), self.a2, self.b2),
        )
    }
}

// Φ(z) kept strictly inside (0, 1) so the gamma quantile stays finite.
fn uniform_of(z: f64) -> f64 {
    normal_cdf(z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Bulk index: 100 times total liver over total fish.
pub fn hsi_bulk(pairs: &FishPairs) -> Result<f64> {
    bulk_of(pairs.liver_kg(), pairs.fish_kg())
}

/// Per-fish index: 100 times the mean liver-to-fish ratio.
pub fn hsi_ind(pairs: &FishPairs) -> Result<f64> {
    ind_of(pairs.liver_kg(), pairs.fish_kg())
}

fn bulk_of(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    Ok(100.0 * x.iter().sum::<f64>() / y.iter().sum::<f64>())
}

fn ind_of(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    Ok(100.0 * x.iter().zip(y).map(|(a, b)| a / b).sum::<f64>() / x.len() as f64)
}

/// Population index as a mixture over strata: `Σ w(u) HSI(u)`.
pub fn hsi_stratified(weights: &[f64], indices: &[f64]) -> Result<f64> {
    if weights.is_empty() || weights.len() != indices.len() {
        return Err(Error::InvalidInput(format!(
            "{} weights for {} stratum indices",
            weights.len(),
            indices.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidInput(
            "stratum weights must be nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "stratum weights sum to {total}, not 1"
        )));
    }
    Ok(weights.iter().zip(indices).map(|(w, h)| w * h).sum())
}

/// Gamma maximum likelihood with the rate profiled out.
///
/// Solves `ln a - ψ(a) = ln x̄ - mean(ln x)` by Newton steps on `ln a`,
/// started from the method of moments. Returns `(shape, rate)`.
pub fn fit_gamma(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: x.len(),
        });
    }
    if x.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(
            "gamma data must be positive and finite".into(),
        ));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let s = mean.ln() - x.iter().map(|v| v.ln()).sum::<f64>() / n;
    if !(var > 0.0) || !(s > 0.0) {
        return Err(Error::ZeroVariance("gamma sample".into()));
    }
    let mut a = mean * mean / var;
    for _ in 0..100 {
        let f = a.ln() - digamma(a) - s;
        let df = 1.0 / a - trigamma(a);
        // Newton in t = ln a keeps the iterate positive
        let step = f / (df * a);
        let next = a * (-step).exp().clamp(0.1, 10.0);
        if (next - a).abs() <= 1e-12 * a {
            return Ok((next, next / mean));
        }
        a = next;
    }
    Err(Error::NonConvergence(100))
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if !(sxx > 0.0 && syy > 0.0) {
        return Err(Error::ZeroVariance("correlation input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Fits the copula model to raw margins without the `liver < fish` check.
pub fn fit_margins(x: &[f64], y: &[f64]) -> Result<CopulaModel> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("margins differ in length".into()));
    }
    if x.len() < MIN_FIT_PAIRS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_PAIRS,
            available: x.len(),
        });
    }
    let (a1, b1) = fit_gamma(x)?;
    let (a2, b2) = fit_gamma(y)?;
    let scores = |v: &[f64], a: f64, b: f64| -> Vec<f64> {
        v.iter()
            .map(|&t| normal_quantile(gamma_cdf(t, a, b).clamp(1e-300, 1.0 - 1e-16)))
            .collect()
    };
    let rho = pearson(&scores(x, a1, b1), &scores(y, a2, b2))?;
    // a perfectly comonotone sample would give |rho| = 1
    let rho = rho.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
    CopulaModel::new(a1, b1, a2, b2, rho)
}

/// Gamma margins by maximum likelihood, then the Pearson correlation of the
/// normal scores under the fitted margins.
pub fn fit_copula(pairs: &FishPairs) -> Result<CopulaModel> {
    fit_margins(pairs.liver_kg(), pairs.fish_kg())
}

/// Index pair from one simulated sample of fish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexPair {
    pub rep: usize,
    pub hsi_ind: f64,
    pub hsi_bulk: f64,
}

/// Replicated (per-fish, bulk) index pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaSimulation {
    pub model: CopulaModel,
    pub n_fish: usize,
    pub seed: u64,
    pub reps: Vec<IndexPair>,
}

/// Means, standard deviations and correlation of the simulated indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexSummary {
    pub mean_ind: f64,
    pub sd_ind: f64,
    pub mean_bulk: f64,
    pub sd_bulk: f64,
    pub correlation: f64,
}

impl CopulaSimulation {
    pub fn ind(&self) -> Vec<f64> {
        self.reps.iter().map(|r| r.hsi_ind).collect()
    }

    pub fn bulk(&self) -> Vec<f64> {
        self.reps.iter().map(|r| r.hsi_bulk).collect()
    }

    pub fn summary(&self) -> Result<IndexSummary> {
        let (ind, bulk) = (self.ind(), self.bulk());
        if ind.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                available: ind.len(),
            });
        }
        let (mean_ind, sd_ind) = mean_sd(&ind);
        let (mean_bulk, sd_bulk) = mean_sd(&bulk);
        Ok(IndexSummary {
            mean_ind,
            sd_ind,
            mean_bulk,
            sd_bulk,
            correlation: pearson(&ind, &bulk)?,
        })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["rep", "hsi_ind", "hsi_bulk"])?;
        for r in &self.reps {
            w.write_record([
                r.rep.to_string(),
                format_number(r.hsi_ind),
                format_number(r.hsi_bulk),
            ])?;
        }
        flush(w)
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// Simulates `n_reps` samples of `n_fish` specimens and records both indices
/// for each. Replicate `r` draws from a generator seeded with `seed + r`.
pub fn simulate_copula(
    model: &CopulaModel,
    n_fish: usize,
    n_reps: usize,
    seed: u64,
) -> Result<CopulaSimulation> {
    model.validate()?;
    if n_fish == 0 {
        return Err(Error::InvalidInput("n_fish must be at least 1".into()));
    }
    let reps = (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(rep as u64));
            let (mut sx, mut sy, mut sr) = (0.0, 0.0, 0.0);
            for _ in 0..n_fish {
                let (x, y) = model.draw(&mut rng);
                sx += x;
                sy += y;
                sr += x / y;
            }
            IndexPair {
                rep,
                hsi_ind: 100.0 * sr / n_fish as f64,
                hsi_bulk: 100.0 * sx / sy,
            }
        })
        .collect();
    Ok(CopulaSimulation {
        model: *model,
        n_fish,
        seed,
        reps,
    })
}

/// Least-squares line `bulk = intercept + slope * ind`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranslationLine {
    pub intercept: f64,
    pub slope: f64,
    pub n_reps: usize,
}

impl TranslationLine {
    pub fn predict(&self, hsi_ind: f64) -> f64 {
        self.intercept + self.slope * hsi_ind
    }
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<TranslationLine> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput(
            "line fit needs two equal-length samples of size ≥ 2".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if !(sxx > 1e-24 * n * mx.abs().max(1.0).powi(2)) {
        return Err(Error::ZeroVariance("simulated per-fish index".into()));
    }
    let slope = sxy / sxx;
    Ok(TranslationLine {
        intercept: my - slope * mx,
        slope,
        n_reps: x.len(),
    })
}

/// Regresses the bulk index on the per-fish index across simulated replicates.
pub fn translation(
    model: &CopulaModel,
    n_fish: usize,
    n_reps: usize,
    seed: u64,
) -> Result<TranslationLine> {
    if n_reps < MIN_TRANSLATION_REPS {
        return Err(Error::InsufficientData {
            needed: MIN_TRANSLATION_REPS,
            available: n_reps,
        });
    }
    translation_from(&simulate_copula(model, n_fish, n_reps, seed)?)
}

pub fn translation_from(sim: &CopulaSimulation) -> Result<TranslationLine> {
    fit_line(&sim.ind(), &sim.bulk())
}
