//! Tabular results and their CSV and JSON encodings.

use std::io::Write;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::json;

use crate::error::CliError;

/// Bumped whenever columns or metadata change meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    /// Empty for text columns.
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }

    pub fn header(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{} [{}]", self.name, self.unit)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Count(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Count(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Num(v) if v.is_finite() => s.serialize_f64(*v),
            Cell::Num(v) => s.serialize_str(&format_number(*v)),
            Cell::Count(v) => s.serialize_u64(*v),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Empty => s.serialize_none(),
        }
    }
}

/// 17 significant digits, enough to parse back to the same `f64`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Count(v) => v.to_string(),
            Cell::Text(t) => t.clone(),
            Cell::Empty => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Count(v) => Some(*v as f64),
            _ => None,
        }
    }
}

/// Provenance written next to every table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub started_unix_s: u64,
    pub wall_clock_s: f64,
    /// Effective configuration; feeding it back with `--config` reproduces the rows.
    pub config: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    /// Errors of rows written with an error flag.
    pub failures: Vec<molsig::Error>,
}

impl ResultTable {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row does not match schema");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Values of column `name` in rows whose first cell is `kind`.
    pub fn numbers(&self, name: &str, kind: Option<&str>) -> Vec<Option<f64>> {
        let Some(k) = self.column(name) else { return Vec::new() };
        self.rows
            .iter()
            .filter(|r| kind.is_none_or(|want| matches!(&r[0], Cell::Text(t) if t == want)))
            .map(|r| r[k].as_f64())
            .collect()
    }

    /// Error to report once the table has been written, if any row failed.
    pub fn failure(&self) -> Option<CliError> {
        let first = self.failures.first()?.clone();
        Some(CliError::Rows {
            failed: self.failures.len(),
            total: self.rows.len(),
            ambiguous: self.failures.iter().any(|e| matches!(e, molsig::Error::Ambiguous { .. })),
            first,
        })
    }

    /// RFC 4180 CSV: CRLF line ends, quoting where needed, one header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
        let csv_err = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(self.columns.iter().map(Column::header)).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field)).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self, meta: &Meta) -> serde_json::Value {
        json!({
            "meta": meta,
            "schema": {
                "version": SCHEMA_VERSION,
                "columns": self.columns,
            },
            "rows": self.rows,
        })
    }
}
