//! Structured records of verified inequalities.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs <= rhs`
    AtMost,
    /// `lhs == rhs`
    Equal,
}

/// One checked inequality (or identity): both sides, the constant involved
/// if any, and the signed margin.
///
/// For `AtMost` the margin is `rhs - lhs`; for `Equal` it is `-|lhs - rhs|`.
/// A check passes when `margin >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub check: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: Option<f64>,
    pub margin: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl EstimateReport {
    /// `lhs <= rhs` up to `rel_tol · max(|lhs|, |rhs|)`.
    pub fn at_most(check: impl Into<String>, lhs: f64, rhs: f64, rel_tol: f64) -> Self {
        let tolerance = rel_tol * lhs.abs().max(rhs.abs());
        Self::build(
            check.into(),
            Relation::AtMost,
            lhs,
            rhs,
            rhs - lhs,
            tolerance,
        )
    }

    /// `lhs <= rhs` up to an absolute tolerance.
    pub fn at_most_abs(check: impl Into<String>, lhs: f64, rhs: f64, abs_tol: f64) -> Self {
        Self::build(check.into(), Relation::AtMost, lhs, rhs, rhs - lhs, abs_tol)
    }

    /// `lhs == rhs` up to `rel_tol · max(|lhs|, |rhs|)`.
    pub fn equal(check: impl Into<String>, lhs: f64, rhs: f64, rel_tol: f64) -> Self {
        let tolerance = rel_tol * lhs.abs().max(rhs.abs());
        Self::build(
            check.into(),
            Relation::Equal,
            lhs,
            rhs,
            -(lhs - rhs).abs(),
            tolerance,
        )
    }

    fn build(
        check: String,
        relation: Relation,
        lhs: f64,
        rhs: f64,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        let passed = margin.is_finite() && margin >= -tolerance;
        Self {
            check,
            relation,
            lhs,
            rhs,
            constant: None,
            margin,
            tolerance,
            passed,
            note: String::new(),
        }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant = Some(c);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// One human-readable line.
    pub fn summary_line(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::Equal => "==",
        };
        let mut line = format!(
            "[{}] {}: {:.6e} {} {:.6e} (margin {:+.3e}, tol {:.1e})",
            if self.passed { "PASS" } else { "FAIL" },
            self.check,
            self.lhs,
            rel,
            self.rhs,
            self.margin,
            self.tolerance
        );
        if let Some(c) = self.constant {
            line.push_str(&format!(" const={c:.6e}"));
        }
        if !self.note.is_empty() {
            line.push_str(" | ");
            line.push_str(&self.note);
        }
        line
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_verdicts() {
        let r = EstimateReport::at_most("a", 1.0, 2.0, 0.0);
        assert!(r.passed);
        assert_eq!(r.margin, 1.0);
        let r = EstimateReport::at_most("b", 1.0 + 1e-9, 1.0, 1e-8);
        assert!(r.passed);
        let r = EstimateReport::at_most("c", 1.1, 1.0, 1e-8);
        assert!(!r.passed);
        let r = EstimateReport::equal("d", 1.0, 1.0 + 1e-12, 1e-10);
        assert!(r.passed && r.margin <= 0.0);
        assert!(!EstimateReport::at_most("e", f64::NAN, 1.0, 1.0).passed);
        assert!(r.summary_line().starts_with("[PASS] d"));
    }
}
