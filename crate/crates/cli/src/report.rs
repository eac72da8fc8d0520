//! Flat report tables, written as CSV, plus the JSON run manifest.

use std::path::Path;

use serde::Serialize;

/// Provenance of a column's values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    /// Input parameter of the cell.
    Param,
    /// Computed exactly up to rounding.
    Exact,
    /// Certified lower bound.
    Lower,
    /// Certified upper bound.
    Upper,
    /// Measured value with no certificate in either direction.
    Measured,
    Flag,
    Text,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub tag: Tag,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Num(x) if x.is_nan() => "nan".into(),
            Value::Num(x) if x.is_infinite() => if *x > 0.0 { "inf".into() } else { "-inf".into() },
            Value::Num(x) => format!("{x:e}"),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
            Value::Missing => String::new(),
        }
    }
}

/// One row under construction; column order is insertion order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    cells: Vec<(Column, Value)>,
}

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    fn push(mut self, name: &str, tag: Tag, value: Value) -> Self {
        self.cells.push((Column { name: name.to_string(), tag }, value));
        self
    }

    pub fn param(self, name: &str, v: f64) -> Self {
        self.push(name, Tag::Param, Value::Num(v))
    }

    pub fn param_int(self, name: &str, v: usize) -> Self {
        self.push(name, Tag::Param, Value::Int(v as i64))
    }

    pub fn param_text(self, name: &str, v: impl Into<String>) -> Self {
        self.push(name, Tag::Param, Value::Text(v.into()))
    }

    pub fn exact(self, name: &str, v: f64) -> Self {
        self.push(name, Tag::Exact, Value::Num(v))
    }

    pub fn count(self, name: &str, v: usize) -> Self {
        self.push(name, Tag::Exact, Value::Int(v as i64))
    }

    pub fn measured(self, name: &str, v: f64) -> Self {
        self.push(name, Tag::Measured, Value::Num(v))
    }

    pub fn lower(self, name: &str, v: f64) -> Self {
        self.push(name, Tag::Lower, Value::Num(v))
    }

    pub fn upper(self, name: &str, v: f64) -> Self {
        self.push(name, Tag::Upper, Value::Num(v))
    }

    /// `<name>_lower` and `<name>_upper`.
    pub fn bounds(self, name: &str, lower: f64, upper: f64) -> Self {
        self.lower(&format!("{name}_lower"), lower).upper(&format!("{name}_upper"), upper)
    }

    pub fn flag(self, name: &str, v: bool) -> Self {
        self.push(name, Tag::Flag, Value::Bool(v))
    }

    pub fn text(self, name: &str, v: impl Into<String>) -> Self {
        self.push(name, Tag::Text, Value::Text(v.into()))
    }

    pub fn optional(self, name: &str, tag: Tag, v: Option<f64>) -> Self {
        self.push(name, tag, v.map_or(Value::Missing, Value::Num))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str) -> Self {
        Table { name: name.to_string(), columns: Vec::new(), rows: Vec::new() }
    }

    /// Appends a row; the first row fixes the columns.
    pub fn push(&mut self, row: Row) {
        let (columns, values): (Vec<Column>, Vec<Value>) = row.cells.into_iter().unzip();
        if self.rows.is_empty() && self.columns.is_empty() {
            self.columns = columns;
        } else {
            assert_eq!(columns, self.columns, "rows of table {} disagree on columns", self.name);
        }
        self.rows.push(values);
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render))?;
        }
        w.flush()
    }

    /// Pairs `x_lower`/`x_upper` with `x_lower > x_upper`, as (row, name).
    pub fn inverted_bounds(&self) -> Vec<(usize, String)> {
        let mut out = Vec::new();
        for (i, c) in self.columns.iter().enumerate() {
            let Some(stem) = c.name.strip_suffix("_lower") else { continue };
            let Some(j) = self.columns.iter().position(|d| d.name == format!("{stem}_upper")) else { continue };
            for (r, row) in self.rows.iter().enumerate() {
                if let (Value::Num(lo), Value::Num(hi)) = (&row[i], &row[j]) {
                    if *lo > hi * (1.0 + 1e-9) + 1e-12 {
                        out.push((r, stem.to_string()));
                    }
                }
            }
        }
        out
    }
}

/// An embedded assertion and its outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Serialize)]
struct TableEntry<'a> {
    file: String,
    rows: usize,
    columns: &'a [Column],
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a crate::config::ExperimentConfig,
    pub jobs: usize,
    pub wall_time_seconds: f64,
    pub checks: &'a [Check],
}

/// Writes every table as `<name>.csv` and `manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, tables: &[Table], manifest: &Manifest<'_>) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for t in tables {
        t.write_csv(&dir.join(format!("{}.csv", t.name)))?;
    }
    let entries: Vec<TableEntry<'_>> =
        tables.iter().map(|t| TableEntry { file: format!("{}.csv", t.name), rows: t.rows.len(), columns: &t.columns }).collect();
    let mut value = serde_json::to_value(manifest).map_err(std::io::Error::other)?;
    value["tables"] = serde_json::to_value(entries).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&value).map_err(std::io::Error::other)? + "\n")
}
