//! Output documents: a config header, named tables, an optional trailer and
//! an optional timing section, rendered as commented CSV or as JSON with
//! the same content.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv(&self, out: &mut String) {
        let _ = writeln!(out, "# table: {}", self.name);
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
    }

    fn json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Key/value table used for run summaries.
pub fn summary(pairs: Vec<(&str, Cell)>) -> Table {
    let mut t = Table::new("summary", &["key", "value"]);
    for (k, v) in pairs {
        t.push(vec![k.into(), v]);
    }
    t
}

/// Plain decimal for whole numbers, shortest round-trip scientific
/// notation otherwise.
pub fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    /// Fully resolved configuration, in display order.
    pub config: Vec<(String, String)>,
    pub tables: Vec<Table>,
    /// Closing remarks such as where a path stopped.
    pub trailer: Vec<(String, Cell)>,
    /// Wall-clock measurements; not covered by the reproducibility contract.
    pub timings: Option<Table>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    pub fn config_num(&mut self, key: &str, value: f64) {
        self.config(key, fmt_num(value));
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# ddtruss {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "# command: {}", self.command);
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k} = {v}");
        }
        for t in &self.tables {
            out.push('\n');
            t.write_csv(&mut out);
        }
        if !self.trailer.is_empty() {
            out.push('\n');
            for (k, v) in &self.trailer {
                let _ = writeln!(out, "# {k}: {}", v.csv());
            }
        }
        if let Some(t) = &self.timings {
            out.push('\n');
            t.write_csv(&mut out);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let config: Map<String, Value> = self.config.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        let mut doc = Map::new();
        doc.insert(
            "meta".into(),
            json!({ "ddtruss": env!("CARGO_PKG_VERSION"), "command": self.command, "config": config }),
        );
        let tables: Map<String, Value> = self.tables.iter().map(|t| (t.name.clone(), t.json())).collect();
        doc.insert("tables".into(), Value::Object(tables));
        if !self.trailer.is_empty() {
            let trailer: Map<String, Value> = self.trailer.iter().map(|(k, v)| (k.clone(), v.json())).collect();
            doc.insert("trailer".into(), Value::Object(trailer));
        }
        if let Some(t) = &self.timings {
            doc.insert(t.name.clone(), t.json());
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
        text.push('\n');
        text
    }
}
