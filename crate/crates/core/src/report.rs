//! Machine-readable results of grid checks.
//!
//! A check evaluates a signed margin at every grid point, positive meaning
//! "holds". The report keeps the smallest margin, where it occurred, and the
//! first few violations, always in grid order.

use std::collections::BTreeMap;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Violations beyond this many are counted but not listed.
pub const MAX_LISTED_VIOLATIONS: usize = 50;

pub type Location = BTreeMap<String, f64>;

/// Builds a [`Location`] from `(name, value)` pairs.
pub fn location(pairs: &[(&str, f64)]) -> Location {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridAxis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn new(name: &str, lo: f64, hi: f64, n: usize) -> Self {
        GridAxis { name: name.to_string(), lo, hi, n }
    }

    /// Axis spanning the values of `grid`.
    pub fn over(name: &str, grid: &[f64]) -> Self {
        let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        GridAxis::new(name, lo, hi, grid.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub margin: f64,
    pub location: Location,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub check_name: String,
    pub grid: Vec<GridAxis>,
    pub pass: bool,
    /// Smallest margin seen; positive iff every point passed.
    pub worst_margin: f64,
    /// Where the smallest margin occurred.
    pub location: Location,
    /// Exploratory checks are informational; a failure is a finding.
    pub exploratory: bool,
    pub points: usize,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn new(check_name: &str, grid: Vec<GridAxis>) -> Self {
        CheckReport {
            schema_version: SCHEMA_VERSION,
            check_name: check_name.to_string(),
            grid,
            pass: true,
            worst_margin: f64::INFINITY,
            location: Location::new(),
            exploratory: false,
            points: 0,
            violation_count: 0,
            violations: Vec::new(),
        }
    }

    pub fn exploratory(mut self) -> Self {
        self.exploratory = true;
        self
    }

    /// Records one grid point. NaN margins count as violations.
    pub fn record(&mut self, margin: f64, location: Location) {
        self.points += 1;
        if !(margin >= self.worst_margin) {
            self.worst_margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
            self.location = location.clone();
        }
        if !(margin > 0.0) {
            self.push_violation(Violation { margin, location, error: None });
        }
    }

    /// Records a grid point whose evaluation failed.
    pub fn record_error(&mut self, err: &crate::Error, location: Location) {
        self.points += 1;
        self.worst_margin = f64::NEG_INFINITY;
        self.location = location.clone();
        self.push_violation(Violation { margin: f64::NEG_INFINITY, location, error: Some(err.to_string()) });
    }

    pub fn record_result(&mut self, margin: crate::Result<f64>, location: Location) {
        match margin {
            Ok(m) => self.record(m, location),
            Err(e) => self.record_error(&e, location),
        }
    }

    fn push_violation(&mut self, v: Violation) {
        self.pass = false;
        self.violation_count += 1;
        if self.violations.len() < MAX_LISTED_VIOLATIONS {
            self.violations.push(v);
        }
    }
}
