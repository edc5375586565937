//! Annual time series with missing-value masks, and frames of aligned series.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cells read as missing.
pub const MISSING_SENTINELS: [&str; 3] = ["", "NA", "NaN"];

/// One annual series. Masked entries hold `NaN` in `values`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub start_year: i32,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl Series {
    /// Builds a series; non-finite values become masked entries.
    pub fn new(name: impl Into<String>, start_year: i32, values: Vec<f64>) -> Result<Self> {
        let mask = values.iter().map(|v| !v.is_finite()).collect();
        Self::with_mask(name, start_year, values, mask)
    }

    pub fn with_mask(
        name: impl Into<String>,
        start_year: i32,
        mut values: Vec<f64>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput(
                "series must have at least one entry".into(),
            ));
        }
        if values.len() != mask.len() {
            return Err(Error::InvalidInput(format!(
                "values ({}) and mask ({}) differ in length",
                values.len(),
                mask.len()
            )));
        }
        for (v, &m) in values.iter_mut().zip(&mask) {
            if m {
                *v = f64::NAN;
            } else if !v.is_finite() {
                return Err(Error::InvalidInput("unmasked entry is not finite".into()));
            }
        }
        Ok(Self {
            name: name.into(),
            start_year,
            values,
            mask,
        })
    }

    pub fn from_options(
        name: impl Into<String>,
        start_year: i32,
        values: &[Option<f64>],
    ) -> Result<Self> {
        let mask = values.iter().map(Option::is_none).collect();
        let vals = values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Self::with_mask(name, start_year, vals, mask)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.len() as i32 - 1
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.len()).map(|i| self.start_year + i as i32)
    }

    /// Raw values; masked entries are `NaN`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `true` marks a missing entry.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_masked(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn at(&self, idx: usize) -> Option<f64> {
        (!self.mask[idx]).then_some(self.values[idx])
    }

    /// Value at a calendar year, `None` when masked or outside the span.
    pub fn get(&self, year: i32) -> Option<f64> {
        let off = year - self.start_year;
        if off < 0 || off as usize >= self.len() {
            return None;
        }
        self.at(off as usize)
    }

    pub fn observed(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.years()
            .zip(self.values.iter().zip(&self.mask))
            .filter(|(_, (_, &m))| !m)
            .map(|(y, (&v, _))| (y, v))
    }

    pub fn n_observed(&self) -> usize {
        self.mask.iter().filter(|&&m| !m).count()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Re-indexes onto `[start_year, start_year + len)`, masking years not covered.
    pub fn reindexed(&self, start_year: i32, len: usize) -> Series {
        let vals: Vec<Option<f64>> = (0..len).map(|i| self.get(start_year + i as i32)).collect();
        Series::from_options(self.name.clone(), start_year, &vals).expect("len >= 1")
    }

    /// Applies `f` to observed entries.
    pub fn map_observed(&self, f: impl Fn(f64) -> f64) -> Series {
        let vals = self
            .values
            .iter()
            .zip(&self.mask)
            .map(|(&v, &m)| if m { f64::NAN } else { f(v) })
            .collect();
        Series::with_mask(self.name.clone(), self.start_year, vals, self.mask.clone())
            .expect("mask preserved")
    }
}

/// Shifts a series forward by `k` years on the same year index: entry at
/// year y becomes the input's entry at year y - k.
pub fn lag(s: &Series, k: usize) -> Result<Series> {
    if k >= s.len() {
        return Err(Error::InvalidInput(format!(
            "lag {k} must be smaller than the series length {}",
            s.len()
        )));
    }
    let vals: Vec<Option<f64>> = (0..s.len())
        .map(|i| if i < k { None } else { s.at(i - k) })
        .collect();
    Series::from_options(s.name.clone(), s.start_year, &vals)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Centres and scales the observed entries to sample mean 0 and sample sd 1.
pub fn standardize(s: &Series) -> Result<Series> {
    let obs: Vec<f64> = s.observed().map(|(_, v)| v).collect();
    if obs.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: obs.len(),
        });
    }
    let (mean, sd) = mean_sd(&obs);
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance(s.name.clone()));
    }
    Ok(s.map_observed(|v| (v - mean) / sd))
}

/// Pearson correlation over years where both series are observed.
pub fn correlate(a: &Series, b: &Series) -> Result<f64> {
    let pairs: Vec<(f64, f64)> = a
        .observed()
        .filter_map(|(y, x)| b.get(y).map(|z| (x, z)))
        .collect();
    if pairs.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            available: pairs.len(),
        });
    }
    let n = pairs.len() as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for &(x, z) in &pairs {
        sab += (x - ma) * (z - mb);
        saa += (x - ma) * (x - ma);
        sbb += (z - mb) * (z - mb);
    }
    if saa == 0.0 {
        return Err(Error::ZeroVariance(a.name.clone()));
    }
    if sbb == 0.0 {
        return Err(Error::ZeroVariance(b.name.clone()));
    }
    // symmetric in (a, b): the product saa * sbb commutes exactly
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Named series aligned on a common year span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    start_year: i32,
    len: usize,
    series: Vec<Series>,
}

impl Frame {
    /// Aligns the given series on the union of their spans.
    pub fn new(series: Vec<Series>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::InvalidInput(
                "frame needs at least one series".into(),
            ));
        }
        let mut names = BTreeMap::new();
        for s in &series {
            if names.insert(s.name.clone(), ()).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate series name {:?}",
                    s.name
                )));
            }
        }
        let start = series.iter().map(|s| s.start_year).min().unwrap();
        let end = series.iter().map(|s| s.end_year()).max().unwrap();
        let len = (end - start + 1) as usize;
        let series = series.iter().map(|s| s.reindexed(start, len)).collect();
        Ok(Self {
            start_year: start,
            len,
            series,
        })
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn end_year(&self) -> i32 {
        self.start_year + self.len as i32 - 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        let s = self.start_year;
        (0..self.len).map(move |i| s + i as i32)
    }

    pub fn series(&self) -> &[Series] {
        &self.series
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.series.iter().map(|s| s.name.as_str())
    }

    pub fn get(&self, name: &str) -> Result<&Series> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSeries(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.series.iter().any(|s| s.name == name)
    }

    /// Returns a frame with `s` added (or replacing a series of the same name).
    pub fn with_series(&self, s: Series) -> Result<Frame> {
        let mut all: Vec<Series> = self
            .series
            .iter()
            .filter(|x| x.name != s.name)
            .cloned()
            .collect();
        all.push(s);
        Frame::new(all)
    }

    /// Restricts the frame to years in `[from, to]`.
    pub fn window(&self, from: i32, to: i32) -> Result<Frame> {
        let from = from.max(self.start_year);
        let to = to.min(self.end_year());
        if to < from {
            return Err(Error::InvalidInput(format!("empty window {from}..={to}")));
        }
        let len = (to - from + 1) as usize;
        Ok(Frame {
            start_year: from,
            len,
            series: self.series.iter().map(|s| s.reindexed(from, len)).collect(),
        })
    }

    /// Restricts the frame to years up to and including `year`.
    pub fn up_to(&self, year: i32) -> Result<Frame> {
        self.window(self.start_year, year)
    }

    /// A row is complete when no member series masks it.
    pub fn row_complete(&self, idx: usize) -> bool {
        self.series.iter().all(|s| !s.is_masked(idx))
    }
}

/// Parses one numeric cell; missing-value sentinels give `None`.
pub fn parse_cell(raw: &str, row: usize, column: &str) -> Result<Option<f64>> {
    let t = raw.trim();
    if MISSING_SENTINELS.contains(&t) {
        return Ok(None);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(v)),
        _ => Err(Error::BadCell {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        }),
    }
}

/// Reads a year-indexed CSV. An empty `value_columns` selects every
/// non-year column.
pub fn read_csv<R: Read>(reader: R, year_column: &str, value_columns: &[&str]) -> Result<Frame> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownSeries(name.to_string()))
    };
    let year_idx = col(year_column)?;
    let wanted: Vec<String> = if value_columns.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != year_idx)
            .map(|(_, h)| h.to_string())
            .collect()
    } else {
        value_columns.iter().map(|s| s.to_string()).collect()
    };
    let idxs: Vec<usize> = wanted.iter().map(|n| col(n)).collect::<Result<_>>()?;

    let mut years: Vec<i32> = Vec::new();
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); idxs.len()];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 2; // 1-based, after header
        let yraw = rec.get(year_idx).unwrap_or("");
        let year: i32 = yraw.trim().parse().map_err(|_| Error::BadCell {
            row,
            column: year_column.to_string(),
            value: yraw.to_string(),
        })?;
        if let Some(&prev) = years.last() {
            if year == prev {
                return Err(Error::DuplicateYear(year));
            }
            if year < prev {
                if years.contains(&year) {
                    return Err(Error::DuplicateYear(year));
                }
                return Err(Error::YearsNotIncreasing { prev, next: year });
            }
            // pad gaps with masked rows
            for _ in prev + 1..year {
                cols.iter_mut().for_each(|c| c.push(None));
            }
        }
        years.push(year);
        for (c, (&i, name)) in cols.iter_mut().zip(idxs.iter().zip(&wanted)) {
            c.push(parse_cell(rec.get(i).unwrap_or(""), row, name)?);
        }
    }
    let start = *years.first().ok_or(Error::InsufficientData {
        needed: 1,
        available: 0,
    })?;
    let series = wanted
        .iter()
        .zip(cols)
        .map(|(name, vals)| Series::from_options(name.clone(), start, &vals))
        .collect::<Result<Vec<_>>>()?;
    Frame::new(series)
}

pub fn load_csv(
    path: impl AsRef<Path>,
    year_column: &str,
    value_columns: &[&str],
) -> Result<Frame> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, year_column, value_columns)
}

/// Formats a number with 12 significant digits, shortest representation.
pub fn format_number(x: f64) -> String {
    if !x.is_finite() {
        return "NA".into();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        return "0".into();
    }
    let a = rounded.abs();
    if (1e-6..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Writes a frame as CSV with a leading `year` column; masked cells are `NA`.
pub fn write_csv_to<W: Write>(frame: &Frame, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["year".to_string()];
    header.extend(frame.names().map(str::to_string));
    w.write_record(&header)?;
    for (i, year) in frame.years().enumerate() {
        let mut rec = vec![year.to_string()];
        rec.extend(frame.series().iter().map(|s| match s.at(i) {
            Some(v) => format_number(v),
            None => "NA".into(),
        }));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<csv writer>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_csv(frame: &Frame, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(frame, file)
}
