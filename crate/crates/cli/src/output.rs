//! Result records and CSV emission.

use std::fs;
use std::io;
use std::path::Path;

use gbdt_core::matrix::{row_major, CMatrix, C64};
use serde::{Deserialize, Serialize};

/// One pass/fail record. Non-finite values serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    /// `<=`, `>=`, `<` or `>`
    pub relation: String,
    pub bound: Option<f64>,
    pub pass: bool,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Check {
    pub fn le(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: finite(value), relation: "<=".into(), bound: finite(bound), pass: value <= bound }
    }

    pub fn ge(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: finite(value), relation: ">=".into(), bound: finite(bound), pass: value >= bound }
    }

    pub fn gt(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: finite(value), relation: ">".into(), bound: finite(bound), pass: value > bound }
    }

    pub fn lt(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: finite(value), relation: "<".into(), bound: finite(bound), pass: value < bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: String,
    /// `ok` or `error`
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub checks: Vec<Check>,
    /// Output files, relative to the output directory.
    pub files: Vec<String>,
}

impl TaskReport {
    pub fn passed(&self) -> bool {
        self.status == "ok" && self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub schema_version: u32,
    pub scenario: String,
    pub ode_tol: f64,
    pub tasks: Vec<TaskReport>,
    pub all_pass: bool,
}

/// Leading key column(s) of a matrix series.
pub enum Key<'a> {
    X(&'a [f64]),
    Z(&'a [C64]),
    Named(&'a str, &'a [f64]),
}

/// Writes one row per matrix: key column(s), then `re_ij, im_ij` in
/// row-major order (1-based), then optional extra real columns.
pub fn write_matrix_series(
    dir: &Path,
    file: &str,
    key: Key<'_>,
    mats: &[CMatrix],
    extra: &[(&str, Vec<f64>)],
) -> io::Result<String> {
    let mut w = csv::Writer::from_path(dir.join(file))?;
    let (r, k) = mats.first().map_or((0, 0), |m| m.shape());
    let mut header: Vec<String> = match key {
        Key::X(_) => vec!["x".into()],
        Key::Z(_) => vec!["re_z".into(), "im_z".into()],
        Key::Named(name, _) => vec![name.into()],
    };
    for i in 1..=r {
        for j in 1..=k {
            header.push(format!("re_{i}{j}"));
            header.push(format!("im_{i}{j}"));
        }
    }
    header.extend(extra.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header)?;
    for (row, m) in mats.iter().enumerate() {
        let mut rec: Vec<String> = match &key {
            Key::X(x) | Key::Named(_, x) => vec![x[row].to_string()],
            Key::Z(z) => vec![z[row].re.to_string(), z[row].im.to_string()],
        };
        for e in row_major(m) {
            rec.push(e.re.to_string());
            rec.push(e.im.to_string());
        }
        rec.extend(extra.iter().map(|(_, v)| v[row].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(file.to_string())
}

/// Writes a plain table of real columns.
pub fn write_table(dir: &Path, file: &str, header: &[&str], rows: &[Vec<f64>]) -> io::Result<String> {
    let mut w = csv::Writer::from_path(dir.join(file))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(file.to_string())
}

pub fn write_results(dir: &Path, results: &Results) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(results).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(dir.join("results.json"), text)
}
