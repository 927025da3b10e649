//! Human-readable summary of a results file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::output::Results;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: not a results file: {source}")]
    Parse { path: String, source: serde_json::Error },
}

fn fmt_num(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3e}"))
}

/// One row per check (tasks that failed numerically get an error row).
pub fn summary_table(results: &Results) -> String {
    let mut rows: Vec<[String; 5]> = Vec::new();
    for t in &results.tasks {
        if let Some(e) = &t.error {
            rows.push([t.task.clone(), "error".into(), e.clone(), String::new(), "FAIL".into()]);
        }
        for c in &t.checks {
            rows.push([
                t.task.clone(),
                c.name.clone(),
                fmt_num(c.value),
                format!("{} {}", c.relation, fmt_num(c.bound)),
                if c.pass { "pass".into() } else { "FAIL".into() },
            ]);
        }
    }
    let header = ["task", "check", "value", "bound", "result"].map(String::from);
    let mut widths = header.clone().map(|h| h.len());
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        let line: Vec<String> = r.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    out
}

pub fn load(path: &Path) -> Result<Results, ReportError> {
    let p = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ReportError::Read { path: p.clone(), source })?;
    serde_json::from_str(&text).map_err(|source| ReportError::Parse { path: p, source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::{Check, TaskReport};

    fn results(checks: Vec<Check>) -> Results {
        let t = TaskReport { task: "evolve".into(), status: "ok".into(), error: None, checks, files: vec![] };
        let all_pass = t.passed();
        Results { schema_version: 1, scenario: "t".into(), ode_tol: 1e-10, tasks: vec![t], all_pass }
    }

    #[test]
    fn empty_results_give_header_only() {
        let r = Results { schema_version: 1, scenario: "t".into(), ode_tol: 1e-10, tasks: vec![], all_pass: true };
        assert_eq!(summary_table(&r).lines().count(), 1);
    }

    #[test]
    fn failing_rows_are_flagged() {
        let r = results(vec![Check::le("a", 1.0, 2.0), Check::le("b", 3.0, 2.0)]);
        let t = summary_table(&r);
        assert!(t.lines().nth(1).unwrap().ends_with("pass"));
        assert!(t.lines().nth(2).unwrap().ends_with("FAIL"));
        assert!(!r.all_pass);
    }
}
