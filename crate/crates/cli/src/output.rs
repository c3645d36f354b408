//! Rendering of command results as JSON, CSV or an aligned table.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format [default: json, csv for game-sweep]
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

pub type Row = Map<String, Value>;

/// Result of one command. `extra` holds command-level fields such as the
/// scenario echo, `rows` the tabular results.
#[derive(Debug, Default)]
pub struct Report {
    pub command: String,
    pub extra: Row,
    pub rows: Vec<Row>,
    pub converged: bool,
    /// False when a reproduced fixture missed a check.
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            converged: true,
            passed: true,
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.extra.insert(key.to_string(), value.into());
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => csv(&self.rows),
            Format::Table => table(&self.rows),
        }
    }

    fn json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("schema_version".into(), SCHEMA_VERSION.into());
        doc.insert("command".into(), self.command.clone().into());
        doc.insert("converged".into(), self.converged.into());
        for (k, v) in &self.extra {
            doc.insert(k.clone(), v.clone());
        }
        doc.insert("results".into(), Value::Array(self.rows.iter().cloned().map(Value::Object).collect()));
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values serialize");
        text.push('\n');
        text
    }
}

/// Builds a row from `(key, value)` pairs, keeping their order.
#[macro_export]
macro_rules! row {
    ($($key:expr => $value:expr),* $(,)?) => {{
        let mut r = $crate::output::Row::new();
        $(r.insert($key.to_string(), serde_json::json!($value));)*
        r
    }};
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

fn csv_field(v: &Value) -> String {
    let s = cell(v);
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s
    }
}

fn header(rows: &[Row]) -> Vec<&str> {
    rows.first().map(|r| r.keys().map(String::as_str).collect()).unwrap_or_default()
}

fn csv(rows: &[Row]) -> String {
    let keys = header(rows);
    let mut out = keys.join(",");
    out.push('\n');
    for r in rows {
        let fields: Vec<String> = keys.iter().map(|k| r.get(*k).map(csv_field).unwrap_or_default()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn table_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e6) {
                format!("{x:.4e}")
            } else {
                format!("{x:.6}")
            }
        }
        Value::Array(items) => items.iter().map(table_cell).collect::<Vec<_>>().join(" "),
        other => cell(other),
    }
}

fn table(rows: &[Row]) -> String {
    let keys = header(rows);
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| keys.iter().map(|k| r.get(*k).map(table_cell).unwrap_or_default()).collect())
        .collect();
    let widths: Vec<usize> = keys
        .iter()
        .enumerate()
        .map(|(i, k)| body.iter().map(|r| r[i].len()).chain([k.len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, &keys);
    for r in &body {
        line(&mut out, &r.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}
