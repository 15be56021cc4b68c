//! Deterministic CSV and JSON output.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Named columns of floating-point rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// Shortest decimal text that parses back to the same float.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn csv_bytes(table: &Table) -> Result<Vec<u8>> {
    if table.rows.is_empty() {
        return Err(Error::InvalidInput("refusing to write an empty table".into()));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(&table.columns).map_err(io)?;
    for r in &table.rows {
        if r.len() != table.columns.len() {
            return Err(Error::InvalidInput(format!("row of {} values for {} columns", r.len(), table.columns.len())));
        }
        w.write_record(r.iter().map(|&x| format_float(x))).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let bytes = csv_bytes(table)?;
    std::fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_rows_make_four_lines() {
        let mut t = Table::new(&["a", "b", "c", "d", "e"]);
        for k in 0..3 {
            t.push(vec![k as f64, 0.1, 1e-300, -2.5e17, std::f64::consts::PI]);
        }
        let s = String::from_utf8(csv_bytes(&t).unwrap()).unwrap();
        assert_eq!(s.lines().count(), 4);
        assert!(s.ends_with('\n'));
        assert_eq!(s.lines().next().unwrap(), "a,b,c,d,e");
        for line in s.lines().skip(1) {
            let back: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
            assert_eq!(back[4], std::f64::consts::PI);
            assert_eq!(back[2], 1e-300);
        }
    }

    #[test]
    fn empty_table_is_an_error() {
        assert!(csv_bytes(&Table::new(&["t"])).is_err());
    }

    #[test]
    fn non_finite_values_are_spelled_out() {
        assert_eq!(format_float(f64::NAN), "nan");
        assert_eq!(format_float(f64::NEG_INFINITY), "-inf");
        assert_eq!("nan".parse::<f64>().unwrap().is_nan(), true);
    }
}
