//! Invariant suites and acceptance criteria, shared by the CLI and the test targets.

pub mod acceptance;
pub mod suites;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use acceptance::{all_criteria, run_criterion, Criterion, CRITERIA};
pub use suites::{run_all, run_suite, Suite, VerifyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// One measured quantity against its limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub bound: Bound,
    /// Serialized failing input or extra context.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            bound: Bound::AtMost,
            detail: None,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            bound: Bound::AtLeast,
            detail: None,
        }
    }

    /// A yes/no property, stored as `1 ≥ 0.5` or `0 ≥ 0.5`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 0.5)
    }

    /// An error raised while measuring; always fails.
    pub fn errored(name: impl Into<String>, err: impl fmt::Display) -> Self {
        Self::holds(name, false)
            .with_detail(serde_json::json!({ "error": err.to_string() }).to_string())
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn pass(&self) -> bool {
        self.value.is_finite()
            && match self.bound {
                Bound::AtMost => self.value <= self.limit,
                Bound::AtLeast => self.value >= self.limit,
            }
    }

    /// Signed distance to the limit relative to `|limit|` (or absolute for a zero limit);
    /// negative means failure.
    pub fn margin(&self) -> f64 {
        if !self.value.is_finite() {
            return f64::NEG_INFINITY;
        }
        let scale = if self.limit != 0.0 {
            self.limit.abs()
        } else {
            1.0
        };
        match self.bound {
            Bound::AtMost => (self.limit - self.value) / scale,
            Bound::AtLeast => (self.value - self.limit) / scale,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.bound {
            Bound::AtMost => "<=",
            Bound::AtLeast => ">=",
        };
        write!(
            f,
            "{} {}: {:.4e} {op} {:.4e}",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.limit
        )?;
        if let Some(d) = &self.detail {
            write!(f, " {d}")?;
        }
        Ok(())
    }
}

/// Checks of one suite or criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(Check::pass)
    }

    pub fn worst_margin(&self) -> f64 {
        self.checks
            .iter()
            .map(Check::margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_and_verdicts() {
        let a = Check::at_most("a", 0.5e-3, 1e-3);
        assert!(a.pass() && (a.margin() - 0.5).abs() < 1e-12);
        let b = Check::at_least("b", 0.98, 0.99);
        assert!(!b.pass() && b.margin() < 0.0);
        let c = Check::at_most("c", f64::NAN, 1.0);
        assert!(!c.pass() && c.margin() == f64::NEG_INFINITY);
        assert!(Check::holds("d", true).pass() && !Check::holds("e", false).pass());
        let z = Check::at_most("slope", -0.6, 0.0);
        assert!(z.pass() && (z.margin() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn detail_is_valid_json() {
        let c = Check::errored("x", "bad \"thing\"\n");
        let v: serde_json::Value = serde_json::from_str(c.detail.as_deref().unwrap()).unwrap();
        assert_eq!(v["error"], "bad \"thing\"\n");
    }

    #[test]
    fn empty_report_fails() {
        let r = SuiteReport {
            suite: "s".into(),
            checks: vec![],
            seconds: 0.0,
        };
        assert!(!r.pass());
    }
}
