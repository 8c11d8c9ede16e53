//! Result tables: a fixed column set per command, rows sorted by
//! `(N, c, method)`, floats rounded to nine significant digits.

use std::cmp::Ordering;
use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Self::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Self::Empty, Into::into)
    }
}

/// `x` rounded to nine significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// Nine-significant-digit text, plain for moderate magnitudes and in
/// exponent form otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    if r == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Self::Int(v) => v.to_string(),
            Self::Float(v) => format_float(*v),
            Self::Text(s) => s.clone(),
            Self::Bool(b) => b.to_string(),
            Self::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Int(v) => Value::from(*v),
            Self::Float(v) => Number::from_f64(round_sig(*v)).map_or(Value::Null, Value::Number),
            Self::Text(s) => Value::from(s.as_str()),
            Self::Bool(b) => Value::from(*b),
            Self::Empty => Value::Null,
        }
    }
}

/// Sort key of a row: population size, cost, method.
#[derive(Debug, Clone, PartialEq)]
pub struct RowKey {
    pub n: f64,
    pub c: f64,
    pub method: String,
}

impl RowKey {
    pub fn new(n: f64, c: f64, method: &str) -> Self {
        Self {
            n,
            c,
            method: method.to_string(),
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .total_cmp(&other.n)
            .then(self.c.total_cmp(&other.c))
            .then_with(|| self.method.cmp(&other.method))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    rows: Vec<(RowKey, Vec<Cell>)>,
    seed: u64,
}

impl Table {
    /// `columns` excludes the trailing `seed` and `version` columns, which
    /// every table carries.
    pub fn new(columns: &[&'static str], seed: u64) -> Self {
        let mut columns = columns.to_vec();
        columns.extend(["seed", "version"]);
        Self {
            columns,
            rows: Vec::new(),
            seed,
        }
    }

    pub fn push(&mut self, key: RowKey, mut cells: Vec<Cell>) {
        cells.push(Cell::Int(self.seed));
        cells.push(Cell::Text(VERSION.to_string()));
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push((key, cells));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows in output order. The sort is stable, so rows with equal keys
    /// keep their insertion order.
    pub fn rows(&self) -> Vec<&[Cell]> {
        let mut sorted: Vec<&(RowKey, Vec<Cell>)> = self.rows.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        sorted.into_iter().map(|(_, r)| r.as_slice()).collect()
    }

    /// Cell of `column` in output row `row`.
    pub fn get(&self, row: usize, column: &str) -> Option<&Cell> {
        let j = self.columns.iter().position(|c| *c == column)?;
        self.rows().get(row).map(|r| &r[j])
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in self.rows() {
            w.write_record(row.iter().map(Cell::text))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        let records: Vec<Value> = self
            .rows()
            .into_iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &records)
            .map_err(|e| crate::error::CliError::Output(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_float(0.952209647727185), "0.952209648");
        assert_eq!(format_float(140.625), "140.625");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(123_456_789_012.0), "123456789000");
        assert_eq!(format_float(3.2e-7), "3.2e-7");
        assert_eq!(format_float(f64::NAN), "nan");
    }

    #[test]
    fn rows_sort_by_population_cost_method() {
        let mut t = Table::new(&["N", "c", "method"], 1);
        for (n, c, m) in [
            (10.0, 0.5, "normal"),
            (1.0, 0.9, "mc"),
            (10.0, 0.5, "exact"),
        ] {
            t.push(
                RowKey::new(n, c, m),
                vec![(n as u64).into(), c.into(), m.into()],
            );
        }
        let methods: Vec<String> = (0..3).map(|i| t.get(i, "method").unwrap().text()).collect();
        assert_eq!(methods, ["mc", "exact", "normal"]);
        assert_eq!(t.get(0, "seed"), Some(&Cell::Int(1)));
    }

    #[test]
    fn csv_has_header_and_json_nulls() {
        let mut t = Table::new(&["x"], 7);
        t.push(RowKey::new(0.0, 0.0, ""), vec![Cell::Empty]);
        let mut csv = Vec::new();
        t.write(Format::Csv, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next(), Some("x,seed,version"));
        let mut json = Vec::new();
        t.write(Format::Json, &mut json).unwrap();
        let v: Value = serde_json::from_slice(&json).unwrap();
        assert_eq!(v[0]["x"], Value::Null);
        assert_eq!(v[0]["seed"], 7);
    }
}
