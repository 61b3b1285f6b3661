//! Output formatting. Every number is rounded to 9 significant digits.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Rounds to 9 significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Rounds every float inside a JSON value.
pub fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(r) = serde_json::Number::from_f64(sig9(x)) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

fn scalar_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Flattens nested objects and arrays into `(dotted.key, value)` pairs.
fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        other => out.push((prefix.to_string(), scalar_text(other))),
    }
}

/// Destination: a file if `--out` was given, else stdout.
pub struct Sink {
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn open(out: Option<&Path>) -> Result<Self, CliError> {
        let inner: Box<dyn Write> = match out {
            Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
            None => Box::new(std::io::stdout().lock()),
        };
        Ok(Self { inner })
    }

    /// Writes a record: pretty JSON, or `key,value` CSV rows.
    pub fn record<T: Serialize>(&mut self, data: &T, format: Format) -> Result<(), CliError> {
        let mut value = serde_json::to_value(data)?;
        round_value(&mut value);
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut self.inner, &value)?;
                writeln!(self.inner)?;
            }
            Format::Csv => {
                let mut rows = Vec::new();
                flatten("", &value, &mut rows);
                let mut w = csv::Writer::from_writer(&mut self.inner);
                w.write_record(["key", "value"])?;
                for (k, v) in rows {
                    w.write_record([k, v])?;
                }
                w.flush()?;
            }
        }
        self.inner.flush()?;
        Ok(())
    }

    /// Writes a table of numbers: JSON array of objects or CSV with header.
    pub fn table(&mut self, header: &[&str], rows: &[Vec<f64>], format: Format) -> Result<(), CliError> {
        match format {
            Format::Json => {
                let objects: Vec<Value> = rows
                    .iter()
                    .map(|row| {
                        Value::Object(
                            header
                                .iter()
                                .zip(row)
                                .map(|(h, x)| (h.to_string(), json_number(*x)))
                                .collect(),
                        )
                    })
                    .collect();
                serde_json::to_writer_pretty(&mut self.inner, &objects)?;
                writeln!(self.inner)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.inner);
                w.write_record(header)?;
                for row in rows {
                    w.write_record(row.iter().map(|x| sig9(*x).to_string()))?;
                }
                w.flush()?;
            }
        }
        self.inner.flush()?;
        Ok(())
    }
}

fn json_number(x: f64) -> Value {
    serde_json::Number::from_f64(sig9(x)).map_or(Value::Null, Value::Number)
}
