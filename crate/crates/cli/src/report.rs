//! Report rows and the versioned `report.json` document.

use serde::Serialize;
use std::time::Instant;

pub const SCHEMA: &str = "spin7-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    /// compared against its threshold
    Check,
    /// a measured disagreement with a hand-derived formula; never fails a run
    Finding,
    /// informational
    Measurement,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub check: String,
    /// The statement being checked, in words or symbols.
    pub anchor: String,
    pub kind: RowKind,
    pub residual: f64,
    pub threshold: Option<f64>,
    pub pass: bool,
}

impl Row {
    /// Passes when `residual < threshold` and the residual is finite.
    pub fn check(check: impl Into<String>, anchor: impl Into<String>, residual: f64, threshold: f64) -> Self {
        Row {
            check: check.into(),
            anchor: anchor.into(),
            kind: RowKind::Check,
            residual,
            threshold: Some(threshold),
            pass: residual.is_finite() && residual < threshold,
        }
    }

    pub fn finding(check: impl Into<String>, anchor: impl Into<String>, value: f64) -> Self {
        Row { check: check.into(), anchor: anchor.into(), kind: RowKind::Finding, residual: value, threshold: None, pass: true }
    }

    pub fn measurement(check: impl Into<String>, anchor: impl Into<String>, value: f64) -> Self {
        Row { check: check.into(), anchor: anchor.into(), kind: RowKind::Measurement, residual: value, threshold: None, pass: true }
    }

    pub fn line(&self) -> String {
        let verdict = match (self.kind, self.pass) {
            (RowKind::Check, true) => "ok  ",
            (RowKind::Check, false) => "FAIL",
            (RowKind::Finding, _) => "find",
            (RowKind::Measurement, _) => "info",
        };
        match self.threshold {
            Some(t) => format!("{verdict} {:<40} {:>11.3e} < {:.0e}", self.check, self.residual, t),
            None => format!("{verdict} {:<40} {:>11.3e}", self.check, self.residual),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timing {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub command: String,
    pub scenario: Option<serde_json::Value>,
    pub rows: Vec<Row>,
    pub timings: Vec<Timing>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extra: Option<serde_json::Value>,
}

impl RunReport {
    pub fn new(command: &str, scenario: Option<serde_json::Value>) -> Self {
        RunReport { schema: SCHEMA, command: command.into(), scenario, rows: Vec::new(), timings: Vec::new(), pass: true, extra: None }
    }

    pub fn push(&mut self, row: Row) {
        self.pass &= row.pass;
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = Row>) {
        for r in rows {
            self.push(r);
        }
    }

    /// Run `f`, recording its wall time under `name`.
    pub fn timed<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        self.timings.push(Timing { name: name.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
