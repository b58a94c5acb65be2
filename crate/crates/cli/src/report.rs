//! Report documents and their two serializations.
//!
//! Every floating-point number is rounded to 15 significant digits before
//! printing, then written in its shortest round-trip form.

use serde::Serialize;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Pretty-printed JSON.
    Structured,
    /// Comma-separated rows.
    Tabular,
}

/// Rows for the comma-separated form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub command: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub input: Value,
    pub result: Value,
    pub verdict: &'static str,
    #[serde(skip)]
    pub table: Table,
}

impl ReportDocument {
    pub fn new(command: &str, input: Value, result: Value, passed: bool, table: Table) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            input,
            result,
            verdict: if passed { "pass" } else { "fail" },
            table,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }
}

pub fn round_sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig15(n.as_f64().unwrap());
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, round_value(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

fn cell(v: &Value) -> String {
    match round_value(v.clone()) {
        Value::String(s) => s,
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

pub fn emit_report(doc: &ReportDocument, format: Format) -> String {
    match format {
        Format::Structured => {
            let value = round_value(serde_json::to_value(doc).expect("plain data"));
            let mut out = serde_json::to_string_pretty(&value).expect("plain data");
            out.push('\n');
            out
        }
        Format::Tabular => {
            let mut out = doc.table.header.join(",");
            out.push('\n');
            for row in &doc.table.rows {
                out.push_str(&row.iter().map(cell).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
    }
}
