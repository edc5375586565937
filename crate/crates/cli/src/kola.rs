//! Monthly temperatures to winter means: winter `y` averages October to
//! December of `y - 1` and January to March of `y`.

use std::collections::BTreeMap;
use std::io::Read;

use anyhow::{bail, Context, Result};
use hjortic::frame::parse_cell;
use hjortic::Series;

pub const WINTER_MONTHS: [(i32, u32); 6] = [(-1, 10), (-1, 11), (-1, 12), (0, 1), (0, 2), (0, 3)];

pub type Monthly = BTreeMap<(i32, u32), f64>;

/// Reads `year,month,value` rows, or `year` followed by twelve month columns.
pub fn read_monthly<R: Read>(reader: R, value_column: Option<&str>) -> Result<Monthly> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let lower: Vec<String> = headers.iter().map(str::to_ascii_lowercase).collect();
    let year_idx = lower
        .iter()
        .position(|h| h == "year")
        .context("monthly CSV needs a `year` column")?;
    let month_idx = lower.iter().position(|h| h == "month");
    let mut out = Monthly::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 2;
        let year: i32 = rec
            .get(year_idx)
            .unwrap_or("")
            .parse()
            .with_context(|| format!("bad year at row {row}"))?;
        match month_idx {
            Some(mi) => {
                let vi = match value_column {
                    Some(name) => headers
                        .iter()
                        .position(|h| h == name)
                        .with_context(|| format!("no column {name:?}"))?,
                    None => (0..headers.len())
                        .find(|&i| i != year_idx && i != mi)
                        .context("no value column")?,
                };
                let month: u32 = rec
                    .get(mi)
                    .unwrap_or("")
                    .parse()
                    .with_context(|| format!("bad month at row {row}"))?;
                if !(1..=12).contains(&month) {
                    bail!("month {month} out of range at row {row}");
                }
                if let Some(v) = parse_cell(rec.get(vi).unwrap_or(""), row, &headers[vi])? {
                    insert(&mut out, year, month, v)?;
                }
            }
            None => {
                let cols: Vec<usize> = (0..headers.len()).filter(|&i| i != year_idx).collect();
                if cols.len() != 12 {
                    bail!(
                        "wide monthly CSV needs twelve month columns, found {}",
                        cols.len()
                    );
                }
                for (m, &ci) in cols.iter().enumerate() {
                    if let Some(v) = parse_cell(rec.get(ci).unwrap_or(""), row, &headers[ci])? {
                        insert(&mut out, year, m as u32 + 1, v)?;
                    }
                }
            }
        }
    }
    if out.is_empty() {
        bail!("no monthly values found");
    }
    Ok(out)
}

fn insert(map: &mut Monthly, year: i32, month: u32, v: f64) -> Result<()> {
    if map.insert((year, month), v).is_some() {
        bail!("duplicate entry for {year}-{month:02}");
    }
    Ok(())
}

/// Winter means for every year after the first year in the data; winters
/// missing any of the six months are masked.
pub fn winter_means(monthly: &Monthly, name: &str) -> Result<Series> {
    let first = monthly.keys().next().unwrap().0;
    let last = monthly.keys().next_back().unwrap().0;
    if last <= first {
        bail!("winter means need at least two calendar years");
    }
    let values: Vec<Option<f64>> = (first + 1..=last)
        .map(|y| {
            let vals: Option<Vec<f64>> = WINTER_MONTHS
                .iter()
                .map(|&(dy, m)| monthly.get(&(y + dy, m)).copied())
                .collect();
            vals.map(|v| v.iter().sum::<f64>() / 6.0)
        })
        .collect();
    Ok(Series::from_options(name, first + 1, &values)?)
}
