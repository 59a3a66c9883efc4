//! Tabular CSV/JSON emission with a provenance block.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Floats with 17 significant digits, so values survive a text round trip.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) | Cell::Empty => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::text))?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(r) {
                        m.insert((*c).to_string(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_sha256: Option<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timestamp_unix: Option<u64>,
}

impl Provenance {
    pub fn new(command: &str, parameters: Value, reproducible: bool) -> Self {
        let timestamp_unix = if reproducible {
            None
        } else {
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs())
        };
        Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            parameters,
            input_sha256: None,
            warnings: Vec::new(),
            timestamp_unix,
        }
    }
}

/// A finished command result: the table, extra JSON fields, provenance.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub extra: Map<String, Value>,
    pub provenance: Provenance,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut doc = Map::new();
        doc.insert("provenance".into(), serde_json::to_value(&self.provenance)?);
        doc.insert("columns".into(), json!(self.table.columns));
        doc.insert("rows".into(), self.table.to_json_rows());
        for (k, v) in &self.extra {
            doc.insert(k.clone(), v.clone());
        }
        Ok(serde_json::to_string_pretty(&Value::Object(doc))? + "\n")
    }

    /// Metadata written beside a CSV file.
    pub fn meta_json(&self) -> Result<String> {
        let mut doc = Map::new();
        doc.insert("provenance".into(), serde_json::to_value(&self.provenance)?);
        for (k, v) in &self.extra {
            doc.insert(k.clone(), v.clone());
        }
        Ok(serde_json::to_string_pretty(&Value::Object(doc))? + "\n")
    }

    /// Write to `path` (or `out` when `None`). CSV output to a file also
    /// writes `<path>.meta.json` with the provenance block.
    pub fn write(&self, format: Format, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
        let body = match format {
            Format::Csv => self.table.to_csv()?,
            Format::Json => self.to_json()?,
        };
        match path {
            Some(p) => {
                fs::write(p, body)?;
                if format == Format::Csv {
                    let mut meta = p.as_os_str().to_owned();
                    meta.push(".meta.json");
                    fs::write(meta, self.meta_json()?)?;
                }
            }
            None => out.write_all(body.as_bytes())?,
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, std::f64::consts::PI * 1e-300, 123_456_789.123_456_79] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_shape() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![1.5.into(), 2usize.into(), Cell::Empty]);
        assert_eq!(t.to_csv().unwrap(), "a,b,c\n1.5000000000000000e0,2,\n");
    }
}
