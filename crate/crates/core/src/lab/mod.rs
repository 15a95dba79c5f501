//! Empirical verification of the convergence statements.
//!
//! Every Monte Carlo statistic is reported with its standard error, and every
//! verdict is tied to a declared statistic and threshold, recorded as a
//! [`Check`]. Replications run on the ambient rayon pool; results are
//! collected in replication order before any reduction, so reports are
//! deterministic for a given seed regardless of the number of workers.

mod distance;
mod report;
mod study;
mod tail;
mod variance;

use serde::Serialize;

pub use distance::{coupling_gap, split_distance, split_from_nodes, supnorm_distance, SplitDistance};
pub use report::{write_checks_csv, write_json, CsvRow};
pub use study::{
    chain_and_limit, convergence_study, full_theorem_check, ConvergenceReport, DistanceStats, Monotonicity,
    ReplicationDistances, SplitStats, StudyConfig, StudyMode,
};
pub use tail::{
    gaussian_tail_samples, sigma_increment_samples, sigma_increment_tail, tail_check, TailConfig,
    TailReport, TailRow, DEFAULT_THRESHOLDS,
};
pub use variance::{
    variance_bound_suite, BoundSection, RatioRow, VarianceReport, VarianceSuiteConfig,
    MIN_VARIANCE_REPLICATIONS,
};

/// Outcome of one declared check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// Descriptive statistic without a pass threshold.
    Info,
    /// Not run; the note says why.
    Skipped,
    /// Too little data to decide; not a failure.
    Insufficient,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Verdict::Fail
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Info => "INFO",
            Verdict::Skipped => "SKIPPED",
            Verdict::Insufficient => "INSUFFICIENT",
        }
    }
}

/// One row of a report: a named statistic, optionally per `d`, with the
/// threshold it was judged against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub d: Option<usize>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub threshold: Option<f64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, verdict: Verdict) -> Self {
        Self { name: name.into(), d: None, value, stderr: None, threshold: None, verdict, note: None }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self::new(name, value, Verdict::Info)
    }

    pub fn skipped(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self::new(name, f64::NAN, Verdict::Skipped).with_note(note)
    }

    pub fn at_d(mut self, d: usize) -> Self {
        self.d = Some(d);
        self
    }

    pub fn with_stderr(mut self, se: f64) -> Self {
        self.stderr = Some(se);
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// `true` when no check failed.
pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| !c.verdict.is_failure())
}
