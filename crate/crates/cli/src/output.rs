//! Row rendering. Every table has a fixed header; CSV uses LF line endings and
//! JSON is an array of objects with the header's field names in order.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Text(String),
    Int(u64),
    MaybeInt(Option<u64>),
    /// Fixed six decimal places.
    Time(f64),
    /// Shortest round-trip representation.
    Real(f64),
    Flag(bool),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Field::Text(s) => s.clone(),
            Field::Int(v) => v.to_string(),
            Field::MaybeInt(v) => v.map(|v| v.to_string()).unwrap_or_default(),
            Field::Time(v) => format!("{v:.6}"),
            Field::Real(v) => v.to_string(),
            Field::Flag(b) => b.to_string(),
        }
    }

    fn json(&self) -> Result<String> {
        let finite = |v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Encode(format!("non-finite value {v}")))
            }
        };
        Ok(match self {
            Field::Text(s) => serde_json::to_string(s).map_err(|e| CliError::Encode(e.to_string()))?,
            Field::Int(v) => v.to_string(),
            Field::MaybeInt(None) => "null".into(),
            Field::MaybeInt(Some(v)) => v.to_string(),
            Field::Time(v) => {
                finite(*v)?;
                format!("{v:.6}")
            }
            Field::Real(v) => {
                finite(*v)?;
                let s = v.to_string();
                if s.contains(['.', 'e']) { s } else { format!("{s}.0") }
            }
            Field::Flag(b) => b.to_string(),
        })
    }
}

/// One output row as `(column, value)` pairs.
pub type Record = Vec<(&'static str, Field)>;

fn check_schema(header: &[&str], rows: &[Record]) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        let names: Vec<&str> = row.iter().map(|(k, _)| *k).collect();
        if names != header {
            return Err(CliError::Schema(format!(
                "row {i} has columns [{}], expected [{}]",
                names.join(","),
                header.join(",")
            )));
        }
    }
    Ok(())
}

pub fn render(header: &[&str], rows: &[Record], format: Format) -> Result<Vec<u8>> {
    check_schema(header, rows)?;
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let encode = |e: csv::Error| CliError::Encode(e.to_string());
            w.write_record(header).map_err(encode)?;
            for row in rows {
                w.write_record(row.iter().map(|(_, v)| v.csv())).map_err(encode)?;
            }
            w.into_inner().map_err(|e| CliError::Encode(e.to_string()))
        }
        Format::Json => {
            let mut out = String::from("[");
            for (i, row) in rows.iter().enumerate() {
                out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
                for (j, (k, v)) in row.iter().enumerate() {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&format!("\"{k}\": {}", v.json()?));
                }
                out.push('}');
            }
            out.push_str(if rows.is_empty() { "]\n" } else { "\n]\n" });
            Ok(out.into_bytes())
        }
    }
}

/// Writes `bytes` to `path`, or to stdout when no path is given.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

pub fn write_rows(header: &[&str], rows: &[Record], format: Format, path: Option<&Path>) -> Result<()> {
    emit(&render(header, rows, format)?, path)
}
