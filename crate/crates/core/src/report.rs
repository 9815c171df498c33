//! Pass/fail records shared by every verification suite.

use std::fmt;

use serde_json::{json, Value};

use crate::exactmath::{Coeff, TruncatedSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
        }
    }
}

/// Outcome of one named check. `first_mismatch` is a human-readable locator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub check: String,
    pub status: Status,
    pub first_mismatch: Option<String>,
}

impl VerificationReport {
    pub fn pass(check: impl Into<String>) -> Self {
        VerificationReport { check: check.into(), status: Status::Pass, first_mismatch: None }
    }

    pub fn fail(check: impl Into<String>, mismatch: impl Into<String>) -> Self {
        VerificationReport { check: check.into(), status: Status::Fail, first_mismatch: Some(mismatch.into()) }
    }

    pub fn from_result(check: impl Into<String>, r: Result<(), String>) -> Self {
        match r {
            Ok(()) => Self::pass(check),
            Err(m) => Self::fail(check, m),
        }
    }

    /// Compares two series term by term through the smaller truncation.
    pub fn compare<C: Coeff>(check: impl Into<String>, got: &TruncatedSeries<C>, expected: &TruncatedSeries<C>) -> Self {
        Self::from_result(check, series_diff(got, expected))
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> Value {
        json!({ "check": self.check, "status": self.status.name(), "first_mismatch": self.first_mismatch })
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.first_mismatch {
            None => write!(f, "{}: {}", self.status.name(), self.check),
            Some(m) => write!(f, "{}: {} ({m})", self.status.name(), self.check),
        }
    }
}

/// `Err` describing the first differing monomial, if any.
pub fn series_diff<C: Coeff>(got: &TruncatedSeries<C>, expected: &TruncatedSeries<C>) -> Result<(), String> {
    let d = got.truncation().min(expected.truncation());
    match got.truncate(d).first_difference(&expected.truncate(d)) {
        None => Ok(()),
        Some((m, a, b)) => Err(format!("{m}: got {a}, expected {b}")),
    }
}

/// Conjunction of several reports, named after the group.
pub fn all_passed(reports: &[VerificationReport]) -> bool {
    reports.iter().all(VerificationReport::passed)
}
