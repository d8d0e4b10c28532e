//! Tables rendered as CSV or JSON.

use std::io::Write;

use anyhow::Result;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A column; complex columns span two CSV fields.
#[derive(Debug, Clone)]
pub enum Column {
    Real(&'static str),
    Text(&'static str),
    Count(&'static str),
    /// JSON key, then the CSV headers of the real and imaginary parts.
    Complex(&'static str, &'static str, &'static str),
}

#[derive(Debug, Clone)]
pub enum Cell {
    Real(f64),
    Text(String),
    Count(usize),
    Complex(Complex64),
    Empty,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub cells: Vec<Cell>,
    pub error: Option<String>,
}

impl Row {
    pub fn ok(cells: Vec<Cell>) -> Self {
        Row { cells, error: None }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

pub fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

/// Shortest round-trip text, in exponent form for very small or large values.
pub fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn real_json(x: f64) -> Value {
    // JSON has no NaN or infinity.
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn headers(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for c in &self.columns {
            match c {
                Column::Real(n) | Column::Text(n) | Column::Count(n) => out.push(*n),
                Column::Complex(_, re, im) => {
                    out.push(*re);
                    out.push(*im);
                }
            }
        }
        out
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(e) = &row.error {
                eprintln!("row {}: {e}", i + 1);
            }
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.headers())?;
        for row in &self.rows {
            let mut fields: Vec<String> = Vec::new();
            for (col, cell) in self.columns.iter().zip(&row.cells) {
                match (col, cell) {
                    (Column::Complex(..), Cell::Complex(z)) => {
                        fields.push(fmt_real(z.re));
                        fields.push(fmt_real(z.im));
                    }
                    (Column::Complex(..), _) => {
                        fields.push(String::new());
                        fields.push(String::new());
                    }
                    (_, Cell::Real(x)) => fields.push(fmt_real(*x)),
                    (_, Cell::Text(s)) => fields.push(s.clone()),
                    (_, Cell::Count(n)) => fields.push(n.to_string()),
                    (_, Cell::Complex(z)) => fields.push(z.to_string()),
                    (_, Cell::Empty) => fields.push(String::new()),
                }
            }
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(&row.cells) {
                    let key = match col {
                        Column::Real(n) | Column::Text(n) | Column::Count(n) | Column::Complex(n, ..) => *n,
                    };
                    let v = match cell {
                        Cell::Real(x) => real_json(*x),
                        Cell::Text(s) => Value::String(s.clone()),
                        Cell::Count(n) => json!(n),
                        Cell::Complex(z) => complex_json(*z),
                        Cell::Empty => Value::Null,
                    };
                    obj.insert(key.to_string(), v);
                }
                if let Some(e) = &row.error {
                    obj.insert("error".into(), Value::String(e.clone()));
                }
                Value::Object(obj)
            })
            .collect();
        json!({ "columns": self.headers(), "rows": rows, "errors": self.error_count() })
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)?;
                Ok(())
            }
        }
    }
}
