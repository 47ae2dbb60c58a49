//! Experiment reports and their on-disk formats.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "==")]
    Eq,
}

/// An inequality checked by an experiment, with both sides recorded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Assertion {
    /// `lhs <= rhs + tolerance`.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Assertion {
            name: name.into(),
            lhs,
            relation: Relation::Le,
            rhs,
            tolerance,
            pass: lhs <= rhs + tolerance,
        }
    }

    /// `lhs >= rhs - tolerance`.
    pub fn ge(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Assertion {
            name: name.into(),
            lhs,
            relation: Relation::Ge,
            rhs,
            tolerance,
            pass: lhs >= rhs - tolerance,
        }
    }

    /// `|lhs - rhs| <= tolerance`.
    pub fn eq(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Assertion {
            name: name.into(),
            lhs,
            relation: Relation::Eq,
            rhs,
            tolerance,
            pass: (lhs - rhs).abs() <= tolerance,
        }
    }

    /// A predicate recorded as `value == 1` with the boolean as the value.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Assertion::eq(name, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }
}

/// Tabular output written as CSV and as two-column plot files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub id: String,
    /// Canonical text of the configuration that produced the report.
    pub config: String,
    pub sweep_variable: Option<String>,
    pub sweep_values: Vec<f64>,
    pub quantities: BTreeMap<String, Vec<f64>>,
    pub slopes: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(id: impl Into<String>, config: String) -> Self {
        ExperimentReport {
            id: id.into(),
            config,
            sweep_variable: None,
            sweep_values: Vec::new(),
            quantities: BTreeMap::new(),
            slopes: BTreeMap::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
            wall_time_s: 0.0,
            tables: Vec::new(),
        }
    }

    pub fn sweep(&mut self, variable: &str, values: &[f64]) {
        self.sweep_variable = Some(variable.to_string());
        self.sweep_values = values.to_vec();
    }

    pub fn quantity(&mut self, name: &str, values: Vec<f64>) {
        self.quantities.insert(name.to_string(), values);
    }

    pub fn assert(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.pass)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn fmt_value(v: f64) -> String {
    // shortest round-trip representation
    format!("{v:?}")
}

pub fn write_csv(table: &Table, path: &Path) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| LabError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let csv_err = |e: csv::Error| LabError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|&v| fmt_value(v))).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Two-column whitespace-separated files, one per dependent column.
pub fn write_plotdata(table: &Table, dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    let mut out = Vec::new();
    if table.columns.len() < 2 {
        return Ok(out);
    }
    for j in 1..table.columns.len() {
        let path = dir.join(format!("{}_{}.dat", table.name, table.columns[j]));
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        let mut text = format!("# {} {}\n", table.columns[0], table.columns[j]);
        for row in &table.rows {
            text.push_str(&format!("{} {}\n", fmt_value(row[0]), fmt_value(row[j])));
        }
        f.write_all(text.as_bytes()).map_err(io_err(&path))?;
        out.push(path);
    }
    Ok(out)
}

/// Write `report.json`, one CSV per table and the plot files into `dir`.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<(), LabError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("reports serialize");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    let plots = dir.join("plotdata");
    if report.tables.iter().any(|t| t.columns.len() >= 2) {
        fs::create_dir_all(&plots).map_err(io_err(&plots))?;
    }
    for t in &report.tables {
        write_csv(t, &dir.join(format!("{}.csv", t.name)))?;
        write_plotdata(t, &plots)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub id: String,
    pub passed: bool,
    pub assertions: usize,
    pub failures: Vec<String>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub experiments: Vec<SuiteEntry>,
    pub passed: bool,
    pub wall_time_s: f64,
}

impl SuiteSummary {
    pub fn from_reports(reports: &[ExperimentReport], wall_time_s: f64) -> Self {
        let experiments: Vec<SuiteEntry> = reports
            .iter()
            .map(|r| SuiteEntry {
                id: r.id.clone(),
                passed: r.passed(),
                assertions: r.assertions.len(),
                failures: r.failures().map(|a| a.name.clone()).collect(),
                wall_time_s: r.wall_time_s,
            })
            .collect();
        SuiteSummary {
            passed: experiments.iter().all(|e| e.passed),
            experiments,
            wall_time_s,
        }
    }
}

pub fn write_summary(summary: &SuiteSummary, dir: &Path) -> Result<(), LabError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(summary).expect("summaries serialize");
    fs::write(&path, json + "\n").map_err(io_err(&path))
}
