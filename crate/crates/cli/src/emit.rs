//! Table output as CSV or JSON with fixed float formatting.

use std::io::Write;

use serde::ser::{Serialize, SerializeMap, SerializeSeq, Serializer};
use serde_json::value::RawValue;

use crate::config::Format;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i128),
    Big(String),
    Text(String),
    Bool(bool),
    Null,
}

/// 17 significant digits in scientific notation; non-finite values are
/// spelled `inf`, `-inf`, `nan` in CSV and become `null` in JSON.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Big(s) | Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Null => String::new(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Float(x) if x.is_finite() => raw(s, format_float(*x)),
            Cell::Float(_) | Cell::Null => s.serialize_none(),
            Cell::Int(i) => raw(s, i.to_string()),
            Cell::Big(digits) => raw(s, digits.clone()),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Bool(b) => s.serialize_bool(*b),
        }
    }
}

fn raw<S: Serializer>(s: S, text: String) -> Result<S::Ok, S::Error> {
    RawValue::from_string(text).map_err(serde::ser::Error::custom)?.serialize(s)
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Run-level key/value pairs (CSV: trailing `# key: value` lines).
    pub meta: Vec<(&'static str, Cell)>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self).map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(out).map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let io = |e: csv::Error| CliError::Io(e.to_string());
        {
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut *out);
            w.write_record(&self.columns).map_err(io)?;
            for row in &self.rows {
                w.write_record(row.iter().map(Cell::csv)).map_err(io)?;
            }
            w.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {}", v.csv()).map_err(|e| CliError::Io(e.to_string()))?;
        }
        for n in &self.notes {
            writeln!(out, "# note: {n}").map_err(|e| CliError::Io(e.to_string()))?;
        }
        Ok(())
    }
}

struct Row<'a>(&'a [&'static str], &'a [Cell]);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

struct Rows<'a>(&'a Table);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows.len()))?;
        for r in &self.0.rows {
            seq.serialize_element(&Row(&self.0.columns, r))?;
        }
        seq.end()
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        for (k, v) in &self.meta {
            m.serialize_entry(k, v)?;
        }
        m.serialize_entry("rows", &Rows(self))?;
        m.serialize_entry("notes", &self.notes)?;
        m.end()
    }
}
