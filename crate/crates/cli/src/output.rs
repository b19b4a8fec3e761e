//! Tabular results and their CSV and JSON encodings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    /// Appends a row given as `(column, value)` pairs; unnamed columns stay
    /// empty. Empty cells for columns the table lacks are dropped.
    pub fn push(&mut self, cells: Vec<(&'static str, Cell)>) {
        let mut row = vec![Cell::Empty; self.columns.len()];
        for (name, cell) in cells {
            match self.columns.iter().position(|c| *c == name) {
                Some(i) => row[i] = cell,
                None if cell == Cell::Empty => {}
                None => panic!("unknown column `{name}`"),
            }
        }
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) if v.is_nan() => "nan".into(),
        Cell::Num(v) => format!("{v:.16e}"),
        Cell::Int(v) => v.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

/// `# key=value` header lines, a column row, then one line per row.
pub fn to_csv(table: &Table, meta: &BTreeMap<String, String>) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}={v}");
    }
    s.push_str(&table.columns.join(","));
    s.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(csv_cell).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

fn json_cell(c: &Cell) -> Value {
    match c {
        // from_f64 yields None for non-finite values
        Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
        Cell::Int(v) => Value::from(*v),
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::Bool(b) => Value::from(*b),
        Cell::Empty => Value::Null,
    }
}

/// `{"config": {...}, "columns": [...], "rows": [[...], ...]}`
pub fn to_json(table: &Table, meta: &BTreeMap<String, String>) -> String {
    let config: Map<String, Value> = meta.iter().map(|(k, v)| (k.clone(), Value::from(v.as_str()))).collect();
    let rows: Vec<Value> = table.rows.iter().map(|r| Value::Array(r.iter().map(json_cell).collect())).collect();
    let mut doc = Map::new();
    doc.insert("config".into(), Value::Object(config));
    doc.insert("columns".into(), Value::from(table.columns.clone()));
    doc.insert("rows".into(), Value::Array(rows));
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializing a Value cannot fail");
    s.push('\n');
    s
}
