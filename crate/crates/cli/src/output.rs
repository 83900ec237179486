//! Report assembly and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mhdlab::EstimateReport;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Machine-readable result of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub kind: String,
    /// The resolved configuration, every default filled in.
    pub config: ExperimentConfig,
    pub passed: bool,
    pub checks: Vec<EstimateReport>,
    /// Experiment-specific results (fitted constants, orders, ...).
    pub data: serde_json::Value,
}

/// A CSV artifact: file name and contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub bytes: Vec<u8>,
}

impl Table {
    pub fn from_rows<T: Serialize>(file: &str, rows: &[T]) -> Result<Self> {
        let mut wr = csv::Writer::from_writer(Vec::new());
        for r in rows {
            wr.serialize(r)?;
        }
        Ok(Self {
            file: file.into(),
            bytes: wr.into_inner().context("flushing csv")?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn new(
        config: &ExperimentConfig,
        checks: Vec<EstimateReport>,
        data: serde_json::Value,
        tables: Vec<Table>,
    ) -> Self {
        Self {
            report: RunReport {
                tool: "mhdlab".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                kind: config.experiment.kind().into(),
                config: config.clone(),
                passed: checks.iter().all(|c| c.passed),
                checks,
                data,
            },
            tables,
        }
    }

    pub fn passed(&self) -> bool {
        self.report.passed
    }

    pub fn check(&self, name: &str) -> Option<&EstimateReport> {
        self.report.checks.iter().find(|c| c.check == name)
    }

    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }

    /// Writes `report.json`, `summary.txt` and every table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
            Ok(())
        };
        let mut json = serde_json::to_vec_pretty(&self.report)?;
        json.push(b'\n');
        put(REPORT_FILE, &json)?;
        put(SUMMARY_FILE, summary(&self.report).as_bytes())?;
        for t in &self.tables {
            put(&t.file, &t.bytes)?;
        }
        Ok(written)
    }
}

/// One line per check, then an overall verdict.
pub fn summary(report: &RunReport) -> String {
    let mut out = format!("{} {}\n", report.tool, report.kind);
    for c in &report.checks {
        out.push_str(&c.summary_line());
        out.push('\n');
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!(
        "{}: {} checks, {} failed\n",
        if report.passed { "PASS" } else { "FAIL" },
        report.checks.len(),
        failed
    ));
    out
}

/// The report closest to failing (smallest `margin + tolerance`), annotated
/// with the ensemble size and the index it came from.
pub fn worst_of(reports: Vec<EstimateReport>, what: &str) -> Option<EstimateReport> {
    let count = reports.len();
    let (idx, mut worst) = reports
        .into_iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| slack(a).total_cmp(&slack(b)))?;
    let prefix = format!("worst of {count} {what} (#{idx})");
    worst.note = if worst.note.is_empty() {
        prefix
    } else {
        format!("{prefix}; {}", worst.note)
    };
    Some(worst)
}

fn slack(r: &EstimateReport) -> f64 {
    let s = r.margin + r.tolerance;
    if s.is_nan() {
        f64::NEG_INFINITY
    } else {
        s
    }
}

/// Groups per-sample check lists by check name (in first-seen order) and
/// keeps the worst of each group.
pub fn worst_by_name(per_sample: Vec<Vec<EstimateReport>>, what: &str) -> Vec<EstimateReport> {
    let mut names: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<EstimateReport>> = Vec::new();
    for reps in per_sample {
        for r in reps {
            match names.iter().position(|n| *n == r.check) {
                Some(i) => groups[i].push(r),
                None => {
                    names.push(r.check.clone());
                    groups.push(vec![r]);
                }
            }
        }
    }
    groups
        .into_iter()
        .filter_map(|g| worst_of(g, what))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worst_picks_smallest_slack() {
        let reps = vec![
            EstimateReport::at_most("a", 1.0, 2.0, 0.0),
            EstimateReport::at_most("a", 1.9, 2.0, 0.0),
            EstimateReport::at_most("a", 0.0, 2.0, 0.0),
        ];
        let w = worst_of(reps, "samples").unwrap();
        assert_eq!(w.lhs, 1.9);
        assert!(w.note.contains("#1"));
    }

    #[test]
    fn failures_dominate_grouping() {
        let per = vec![
            vec![
                EstimateReport::at_most("a", 1.0, 2.0, 0.0),
                EstimateReport::at_most("b", 3.0, 2.0, 0.0),
            ],
            vec![
                EstimateReport::at_most("a", 2.5, 2.0, 0.0),
                EstimateReport::at_most("b", 0.0, 2.0, 0.0),
            ],
        ];
        let w = worst_by_name(per, "samples");
        assert_eq!(w.len(), 2);
        assert!(!w[0].passed && w[0].lhs == 2.5);
        assert!(!w[1].passed && w[1].lhs == 3.0);
    }

    #[test]
    fn tables_are_plain_csv() {
        #[derive(Serialize)]
        struct Row {
            x: f64,
            y: u32,
        }
        let t = Table::from_rows("t.csv", &[Row { x: 0.1, y: 2 }]).unwrap();
        assert_eq!(String::from_utf8(t.bytes).unwrap(), "x,y\n0.1,2\n");
    }
}
