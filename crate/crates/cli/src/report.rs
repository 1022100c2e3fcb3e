//! Run reports: an aligned table for humans and a JSON document for scripts.
//!
//! Wall time is shown in the table only, so the JSON document for a given
//! command line and seed is byte-identical across runs.

use std::fmt::{self, Write as _};
use std::time::Duration;

use qexpander::Method;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueTag {
    Exact,
    Power,
    Cert,
}

impl From<Method> for ValueTag {
    fn from(m: Method) -> Self {
        match m {
            Method::ExactSvd => Self::Exact,
            Method::PowerIteration => Self::Power,
        }
    }
}

impl fmt::Display for ValueTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exact => "exact",
            Self::Power => "power",
            Self::Cert => "cert",
        })
    }
}

/// A measured or certified value, always carrying its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaggedLambda {
    pub value: f64,
    pub method: ValueTag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub operation: String,
    pub dim: String,
    pub degree: String,
    pub lambda: Option<TaggedLambda>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl ReportRow {
    pub fn new(operation: impl Into<String>, dim: impl ToString, degree: impl ToString) -> Self {
        Self {
            operation: operation.into(),
            dim: dim.to_string(),
            degree: degree.to_string(),
            lambda: None,
            note: String::new(),
        }
    }

    pub fn with_lambda(mut self, value: f64, method: ValueTag) -> Self {
        self.lambda = Some(TaggedLambda { value, method });
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub seed: Option<u64>,
    pub seed_generated: bool,
    #[serde(skip)]
    pub wall_time: Duration,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<Check>,
    pub outputs: Vec<String>,
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            seed: None,
            seed_generated: false,
            wall_time: Duration::ZERO,
            rows: Vec::new(),
            checks: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn row(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let header = ["operation", "dim", "degree", "lambda", "method", "note"];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                let (lambda, method) = match r.lambda {
                    Some(l) => (format!("{:.10}", l.value), l.method.to_string()),
                    None => ("-".into(), "-".into()),
                };
                [
                    r.operation.clone(),
                    r.dim.clone(),
                    r.degree.clone(),
                    lambda,
                    method,
                    r.note.clone(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }

        let mut out = String::new();
        writeln!(out, "$ qexpander {}", self.command).unwrap();
        if let Some(seed) = self.seed {
            let how = if self.seed_generated { " (generated)" } else { "" };
            writeln!(out, "seed: {seed}{how}").unwrap();
        }
        if !cells.is_empty() {
            let line = |out: &mut String, row: [&str; 6]| {
                let mut s = String::new();
                for (i, (c, w)) in row.iter().zip(widths).enumerate() {
                    // Text columns are left-aligned, numeric ones right-aligned.
                    if i == 0 || i >= 4 {
                        write!(s, "{c:<w$}  ").unwrap();
                    } else {
                        write!(s, "{c:>w$}  ").unwrap();
                    }
                }
                writeln!(out, "{}", s.trim_end()).unwrap();
            };
            line(&mut out, header);
            for row in &cells {
                line(&mut out, row.each_ref().map(String::as_str));
            }
        }
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(out, "[{mark}] {}: {}", c.name, c.detail).unwrap();
        }
        for path in &self.outputs {
            writeln!(out, "wrote {path}").unwrap();
        }
        writeln!(out, "wall time: {:.3}s", self.wall_time.as_secs_f64()).unwrap();
        out
    }
}
