use serde::Serialize;
use solvegeo::format::{csv_row, fmt_sig};

/// Significant digits of every number written as CSV.
pub const CSV_DIGITS: usize = 12;

pub const SCHEMA_VERSION: u32 = 1;

/// Rows of named numeric columns, written as CSV or JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub schema_version: u32,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            schema_version: SCHEMA_VERSION,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&csv_row(row, CSV_DIGITS));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serialises");
        s.push('\n');
        s
    }
}

/// A single number in CSV style, for messages.
pub fn num(x: f64) -> String {
    fmt_sig(x, CSV_DIGITS)
}
