//! Table output: CSV (comma, LF, 17 significant digits) or a JSON mirror of
//! the same rows. Files start with `#` comment lines carrying the command
//! and the fully resolved configuration.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

/// One table cell; `None` renders empty in CSV and null in JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        match v {
            Some(x) => Cell::Float(x),
            None => Cell::Empty,
        }
    }

    fn csv(&self) -> String {
        match self {
            // 17 significant digits: round-trip exact for f64
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `#` comment lines appended after the data (summaries).
    pub trailer: Vec<String>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            trailer: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn render_csv(command: &str, config: &RunConfig, table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&format!("# magnon-sim {command}\n"));
    out.push_str(&format!(
        "# config = {}\n",
        serde_json::to_string(config).expect("config serializes")
    ));
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    for line in &table.trailer {
        out.push_str(&format!("# {line}\n"));
    }
    out
}

fn render_json(command: &str, config: &RunConfig, table: &Table) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = serde_json::Map::new();
            for (col, cell) in table.columns.iter().zip(row) {
                obj.insert((*col).to_string(), cell.json());
            }
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "command": command,
        "config": config,
        "rows": rows,
        "summary": table.trailer,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
    s.push('\n');
    s
}

/// Writes the table to `path` (or stdout when absent) in the configured
/// format.
pub fn emit(
    command: &str,
    config: &RunConfig,
    table: &Table,
    path: Option<&Path>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let text = match format {
        OutputFormat::Csv => render_csv(command, config, table),
        OutputFormat::Json => render_json(command, config, table),
    };
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.5, 1.0 / 3.0, 6.283185307179586e-3, -1.234567890123456e17] {
            let s = Cell::Float(v).csv();
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }
}
