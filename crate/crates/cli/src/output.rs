//! Versioned row schemas and the CSV/JSON writers.

use std::io::Write;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize)]
pub struct Column {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Schema {
    pub command: String,
    pub version: u32,
    pub columns: Vec<Column>,
}

impl Schema {
    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

const SCHEMA_FILES: [(&str, &str); 11] = [
    ("fig1b", include_str!("../schemas/fig1b.json")),
    ("fig2", include_str!("../schemas/fig2.json")),
    ("fig3b", include_str!("../schemas/fig3b.json")),
    ("fig3c", include_str!("../schemas/fig3c.json")),
    ("fig4", include_str!("../schemas/fig4.json")),
    ("sm_fig_rus", include_str!("../schemas/sm_fig_rus.json")),
    ("sm_fig_kerr", include_str!("../schemas/sm_fig_kerr.json")),
    ("sm_fig_trisqueeze", include_str!("../schemas/sm_fig_trisqueeze.json")),
    ("sm_fig_displacement", include_str!("../schemas/sm_fig_displacement.json")),
    ("point", include_str!("../schemas/point.json")),
    ("verify", include_str!("../schemas/verify.json")),
];

pub fn schema(command: &str) -> CliResult<Schema> {
    let (_, text) = SCHEMA_FILES
        .iter()
        .find(|(c, _)| *c == command)
        .ok_or_else(|| CliError::Internal(format!("no schema for {command}")))?;
    serde_json::from_str(text).map_err(|e| CliError::Internal(format!("schema {command}: {e}")))
}

pub fn schema_commands() -> impl Iterator<Item = &'static str> {
    SCHEMA_FILES.iter().map(|(c, _)| *c)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
    Flag(bool),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Flag(b) => Value::from(*b),
            Cell::Empty => Value::Null,
        }
    }
}

/// Shortest round-trip form, switching to exponent notation for very small
/// or very large magnitudes.
fn format_float(v: f64) -> String {
    let a = v.abs();
    if v != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// One output record, keyed by schema column name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(Vec<(&'static str, Cell)>);

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(mut self, name: &'static str, v: f64) -> Self {
        self.0.push((name, Cell::Num(v)));
        self
    }

    pub fn opt(mut self, name: &'static str, v: Option<f64>) -> Self {
        self.0.push((name, v.map_or(Cell::Empty, Cell::Num)));
        self
    }

    pub fn int(mut self, name: &'static str, v: usize) -> Self {
        self.0.push((name, Cell::Int(v)));
        self
    }

    pub fn text(mut self, name: &'static str, v: impl Into<String>) -> Self {
        self.0.push((name, Cell::Text(v.into())));
        self
    }

    pub fn flag(mut self, name: &'static str, v: bool) -> Self {
        self.0.push((name, Cell::Flag(v)));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| *k == name).map(|(_, c)| c)
    }

    /// Cells in schema order; the row must carry exactly the schema columns.
    fn ordered(&self, schema: &Schema) -> CliResult<Vec<&Cell>> {
        if self.0.len() != schema.columns.len() {
            let have: Vec<&str> = self.0.iter().map(|(k, _)| *k).collect();
            return Err(CliError::Internal(format!(
                "{} row has columns {have:?}, schema wants {:?}",
                schema.command,
                schema.names()
            )));
        }
        schema
            .columns
            .iter()
            .map(|c| self.get(&c.name).ok_or_else(|| CliError::Internal(format!("{}: missing {}", schema.command, c.name))))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub fn render(schema: &Schema, rows: &[Row], format: Format) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let internal = |e: csv::Error| CliError::Internal(e.to_string());
            w.write_record(schema.names()).map_err(internal)?;
            for row in rows {
                w.write_record(row.ordered(schema)?.iter().map(|c| c.csv())).map_err(internal)?;
            }
            w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
        }
        Format::Json => {
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                let cells = row.ordered(schema)?;
                let obj: Map<String, Value> =
                    schema.columns.iter().zip(cells).map(|(c, cell)| (c.name.clone(), cell.json())).collect();
                out.push(Value::Object(obj));
            }
            let mut bytes = serde_json::to_vec_pretty(&out).map_err(|e| CliError::Internal(e.to_string()))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

pub fn write_bytes(path: Option<&std::path::Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|source| CliError::Output { path: p.to_path_buf(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Output { path: "<stdout>".into(), source })
        }
    }
}
