//! Campaign configuration, loaded from JSON or assembled from CLI flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{FFamily, GFamily, MapFamily};
use crate::error::{AppError, AppResult};

pub const MAX_DIM: usize = 16;
pub const DEFAULT_SPECTRUM: (f64, f64) = (1e-2, 1e2);
pub const HARSH_SPECTRUM: (f64, f64) = (1e-6, 1e6);
pub const HARSH_TOLERANCE: f64 = 1e-6;

/// Check suites a campaign can select.
pub const SUITES: [&str; 9] = [
    "main_convexity",
    "harmonic_subadditivity",
    "f_mean_inequality",
    "mean_subadditivity",
    "separate_convexity",
    "trace_switch",
    "resolvent_derivatives",
    "lieb_convexity",
    "joint_convexity",
];

/// Which catalog families the samplers may draw from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogFilter {
    pub f: Vec<FFamily>,
    pub g: Vec<GFamily>,
    pub maps: Vec<MapFamily>,
}

impl Default for CatalogFilter {
    fn default() -> Self {
        Self {
            f: FFamily::ALL.to_vec(),
            g: GFamily::ALL.to_vec(),
            maps: MapFamily::ALL.to_vec(),
        }
    }
}

/// Campaign parameters. `trials_per_check` counts trials per suite, except
/// for `main_convexity` where it counts trials per `(f, g, map)` family
/// combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub trials_per_check: usize,
    pub tolerance: f64,
    pub checks: Vec<String>,
    pub catalog: CatalogFilter,
    pub harsh_mode: bool,
    /// Trials of the cube-power negative control.
    pub control_trials: usize,
    pub output: Option<PathBuf>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            dims: vec![2, 3, 4, 6],
            trials_per_check: 1000,
            tolerance: opconv_core::matrix::DEFAULT_LOEWNER_TOL,
            checks: SUITES.iter().map(|s| s.to_string()).collect(),
            catalog: CatalogFilter::default(),
            harsh_mode: false,
            control_trials: 500,
            output: None,
        }
    }
}

impl CampaignConfig {
    pub fn from_json(text: &str) -> AppResult<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| AppError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> AppResult<()> {
        let invalid = |msg: String| Err(AppError::InvalidConfig(msg));
        if self.dims.is_empty() {
            return invalid("dims is empty".into());
        }
        if let Some(d) = self.dims.iter().find(|d| !(1..=MAX_DIM).contains(*d)) {
            return invalid(format!("dimension {d} outside 1..={MAX_DIM}"));
        }
        if self.trials_per_check == 0 {
            return invalid("trials_per_check must be at least 1".into());
        }
        if self.control_trials == 0 {
            return invalid("control_trials must be at least 1".into());
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return invalid(format!("tolerance {} must be positive and finite", self.tolerance));
        }
        if let Some(c) = self.checks.iter().find(|c| !SUITES.contains(&c.as_str())) {
            return invalid(format!("unknown check `{c}`"));
        }
        if self.checks.is_empty() {
            return invalid("no checks selected".into());
        }
        let cat = &self.catalog;
        if cat.f.is_empty() || cat.g.is_empty() || cat.maps.is_empty() {
            return invalid("catalog filters must each keep at least one family".into());
        }
        Ok(())
    }

    pub fn selects(&self, suite: &str) -> bool {
        self.checks.iter().any(|c| c == suite)
    }

    /// Eigenvalue range of sampled positive definite inputs.
    pub fn spectrum(&self) -> (f64, f64) {
        if self.harsh_mode {
            HARSH_SPECTRUM
        } else {
            DEFAULT_SPECTRUM
        }
    }

    pub fn effective_tolerance(&self) -> f64 {
        if self.harsh_mode {
            self.tolerance.max(HARSH_TOLERANCE)
        } else {
            self.tolerance
        }
    }
}
