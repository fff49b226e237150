use std::collections::BTreeMap;

use fockgen::grid::GridSpec;
use serde::Serialize;

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    /// Lattice-approximate check on a grid with no frozen level.
    #[serde(rename = "uncalibrated")]
    Uncalibrated,
    #[serde(rename = "insufficient sectors")]
    InsufficientSectors,
    #[serde(rename = "not_applicable")]
    NotApplicable,
}

/// One line of the report. `pass` is present exactly when both the error
/// and the tolerance are, and then equals `error <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub suite: String,
    pub anchor: String,
    pub status: Status,
    pub error: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Config as echoed in the report (the output location is not part of the
/// result).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportConfig {
    pub grid: GridSpec,
    #[serde(rename = "K")]
    pub max_particles: usize,
    pub suites: Vec<String>,
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub seed: u64,
}

impl From<&RunConfig> for ReportConfig {
    fn from(c: &RunConfig) -> Self {
        ReportConfig {
            grid: c.grid,
            max_particles: c.max_particles,
            suites: c.selected_suites().into_iter().map(String::from).collect(),
            tolerance_overrides: c.tolerance_overrides.clone(),
            seed: c.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub uncalibrated: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: u32,
    pub config: ReportConfig,
    pub checks: Vec<CheckReport>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn new(config: &RunConfig, checks: Vec<CheckReport>) -> VerifyReport {
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.passed += 1,
                Status::Fail => summary.failed += 1,
                Status::Uncalibrated => summary.uncalibrated += 1,
                Status::InsufficientSectors | Status::NotApplicable => summary.skipped += 1,
            }
        }
        VerifyReport { schema: SCHEMA, config: config.into(), checks, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn find(&self, check: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.check == check)
    }

    /// Pretty JSON with a trailing newline; stable for a fixed input.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
