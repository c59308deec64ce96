//! Tables and reports in CSV, JSON or `key = value` form.
//!
//! Numbers are rounded to 12 significant digits once and then printed with
//! the same shortest round-trip formatter in every format, so CSV and JSON
//! carry identical decimals. Missing values are empty in CSV and `null` in
//! JSON.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use crate::config::Format;
use crate::error::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(Option<f64>),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn num(x: f64) -> Self {
        Cell::Num(x.is_finite().then_some(x))
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(Some(x)) => Value::from(round_significant(*x)),
            Cell::Num(None) => Value::Null,
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }

    fn to_text(&self) -> String {
        match self {
            Cell::Num(None) => String::new(),
            Cell::Text(s) => s.clone(),
            other => other.to_json().to_string(),
        }
    }
}

pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = self.columns.join(",");
                out.push('\n');
                for row in &self.rows {
                    let line: Vec<String> = row.iter().map(Cell::to_text).collect();
                    out.push_str(&line.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            self.columns.iter().zip(row).map(|(k, c)| (k.to_string(), c.to_json())).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }
}

/// Named scalar results of a single evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub entries: Vec<(&'static str, Cell)>,
}

impl Report {
    pub fn add(&mut self, key: &'static str, value: Cell) -> &mut Self {
        self.entries.push((key, value));
        self
    }

    /// `key = value` lines for CSV runs, a JSON object otherwise.
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.entries.iter().map(|(k, v)| format!("{k} = {}\n", v.to_text())).collect(),
            Format::Json => {
                let obj: Map<String, Value> = self.entries.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect();
                let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }
}

pub fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
