use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

/// Writes the artifacts of one run into the output directory. File names
/// start with the subcommand's stem, e.g. `bridge.json`, `bridge.csv`.
pub struct Output {
    dir: PathBuf,
    stem: String,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path, stem: &str) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            stem: stem.to_string(),
            written: Vec::new(),
        })
    }

    fn path(&self, suffix: &str, ext: &str) -> PathBuf {
        let name = if suffix.is_empty() {
            format!("{}.{ext}", self.stem)
        } else {
            format!("{}_{suffix}.{ext}", self.stem)
        };
        self.dir.join(name)
    }

    /// Summary JSON: `command`, `config_echo`, then the fields of `body`.
    pub fn summary<E: Serialize, B: Serialize>(&mut self, echo: &E, body: &B) -> Result<()> {
        let mut map = Map::new();
        map.insert("command".into(), Value::String(self.stem.replace('_', " ")));
        map.insert("config_echo".into(), serde_json::to_value(echo)?);
        match serde_json::to_value(body)? {
            Value::Object(fields) => map.extend(fields),
            other => {
                map.insert("result".into(), other);
            }
        }
        self.json("", &Value::Object(map))
    }

    /// Any serializable value as rounded, pretty JSON.
    pub fn json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<()> {
        let path = self.path(suffix, "json");
        let mut text = serde_json::to_string_pretty(&round_floats(serde_json::to_value(value)?))?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(
        &mut self,
        suffix: &str,
        write: impl FnOnce(&mut dyn Write) -> hjortic::Result<()>,
    ) -> Result<()> {
        let path = self.path(suffix, "csv");
        let file =
            File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        let mut w = BufWriter::new(file);
        write(&mut w).with_context(|| format!("cannot write {}", path.display()))?;
        w.flush()?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Rounds every non-integer number to 12 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

/// Writes rows of preformatted cells under `header`.
pub fn write_rows(
    w: &mut dyn Write,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> hjortic::Result<()> {
    let mut c = csv::Writer::from_writer(w);
    c.write_record(header)?;
    for r in rows {
        c.write_record(&r)?;
    }
    c.flush().map_err(|source| hjortic::Error::Io {
        path: "<csv output>".into(),
        source,
    })
}

pub fn num(x: f64) -> String {
    hjortic::frame::format_number(x)
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), num)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_are_rounded_to_twelve_digits() {
        let v = round_floats(json!({"a": 0.1 + 0.2, "b": [1.0 / 3.0, 7], "c": "x"}));
        assert_eq!(v["a"], json!(0.3));
        assert_eq!(v["b"][0].as_f64().unwrap().to_string(), "0.333333333333");
        assert_eq!(v["b"][1], json!(7));
        assert_eq!(v["c"], json!("x"));
    }
}
