//! JSON campaign reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use opconv_core::outcome::{CheckOutcome, Verdict};

use crate::config::CampaignConfig;
use crate::error::{AppError, AppResult};

pub const SCHEMA_VERSION: &str = "1";
pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Whether a check counts towards the exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Theorem,
    Diagnostic,
}

/// Verdict counts and the worst instance seen.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    pub pass: u64,
    pub marginal: u64,
    pub fail: u64,
    pub error: u64,
    /// Smallest `margin / scale` over the trials.
    pub worst_relative_margin: Option<f64>,
    pub worst_margin: Option<f64>,
    pub worst_seed: Option<u64>,
    pub worst_instance: Option<String>,
    pub first_error: Option<String>,
}

impl Tally {
    pub fn record(&mut self, outcome: &CheckOutcome, instance: &str) {
        self.trials += 1;
        match outcome.verdict {
            Verdict::Pass => self.pass += 1,
            Verdict::Marginal => self.marginal += 1,
            Verdict::Fail => self.fail += 1,
        }
        let rel = outcome.relative_margin();
        if self.worst_relative_margin.is_none_or(|w| rel < w) {
            self.worst_relative_margin = Some(rel);
            self.worst_margin = Some(outcome.margin);
            self.worst_seed = Some(outcome.instance_seed);
            self.worst_instance = Some(instance.to_string());
        }
    }

    pub fn record_error(&mut self, message: &str, seed: u64) {
        self.trials += 1;
        self.error += 1;
        if self.first_error.is_none() {
            self.first_error = Some(format!("seed {seed}: {message}"));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check_id: String,
    pub category: Category,
    #[serde(flatten)]
    pub tally: Tally,
    /// Largest absolute value seen per tracked detail key.
    pub detail_max: BTreeMap<String, f64>,
}

/// Main-inequality results for one `(f, g, map)` family combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationSummary {
    pub f: String,
    pub g: String,
    pub map: String,
    #[serde(flatten)]
    pub tally: Tally,
    /// Trials where some link of the proof chain failed.
    pub chain_link_fail: u64,
}

/// A check expected to fail somewhere. Detection means at least one Fail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSummary {
    pub control_id: String,
    #[serde(flatten)]
    pub tally: Tally,
    pub detected: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub theorem_trials: u64,
    pub theorem_marginal: u64,
    pub theorem_fail: u64,
    pub errors: u64,
    pub controls_detected: bool,
    pub ok: bool,
}

/// Overall status. A run is `ok` only with no theorem Fail, no trial error,
/// and every negative control detected.
pub fn summarize(checks: &[CheckSummary], controls: &[ControlSummary]) -> Summary {
    let theorem = || checks.iter().filter(|c| c.category == Category::Theorem);
    let theorem_fail = theorem().map(|c| c.tally.fail).sum();
    let errors = checks.iter().map(|c| c.tally.error).sum();
    let controls_detected = !controls.is_empty() && controls.iter().all(|c| c.detected);
    Summary {
        theorem_trials: theorem().map(|c| c.tally.trials).sum(),
        theorem_marginal: theorem().map(|c| c.tally.marginal).sum(),
        theorem_fail,
        errors,
        controls_detected,
        ok: theorem_fail == 0 && errors == 0 && controls_detected,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub suite_seconds: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub schema_version: String,
    pub library_version: String,
    pub config: CampaignConfig,
    pub checks: Vec<CheckSummary>,
    pub combinations: Vec<CombinationSummary>,
    pub negative_controls: Vec<ControlSummary>,
    pub summary: Summary,
    /// Wall-clock data; the only part of a report that varies between runs.
    pub timing: Timing,
}

impl CampaignReport {
    pub fn check(&self, id: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.check_id == id)
    }

    pub fn control(&self, id: &str) -> Option<&ControlSummary> {
        self.negative_controls.iter().find(|c| c.control_id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without its `timing` field. Identical configs give
    /// identical bodies.
    pub fn body_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        value.as_object_mut().expect("object").remove("timing");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }

    pub fn from_json(text: &str) -> AppResult<Self> {
        serde_json::from_str(text).map_err(|e| AppError::Parse(format!("report: {e}")))
    }

    pub fn write(&self, path: &Path) -> AppResult<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| AppError::io(path, e))
    }
}
