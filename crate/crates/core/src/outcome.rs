//! Per-instance results of inequality checks.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::matrix::LoewnerVerdict;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    Pass,
    Marginal,
    Fail,
}

impl Verdict {
    /// `Pass` for `margin >= 0`, `Marginal` inside the floating-point band
    /// `[-tol * scale, 0)`, `Fail` below it.
    pub fn classify(margin: f64, tolerance: f64, scale: f64) -> Self {
        if margin >= 0.0 {
            Verdict::Pass
        } else if margin >= -tolerance * scale {
            Verdict::Marginal
        } else {
            Verdict::Fail
        }
    }

    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }
}

/// Result of one check on one instance.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckOutcome {
    pub check_id: String,
    pub instance_seed: u64,
    pub verdict: Verdict,
    /// Signed margin of the claimed inequality, in units of its inputs.
    pub margin: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub details: BTreeMap<String, f64>,
}

impl CheckOutcome {
    pub fn from_margin(check_id: impl Into<String>, margin: f64, scale: f64, tolerance: f64) -> Self {
        Self {
            check_id: check_id.into(),
            instance_seed: 0,
            verdict: Verdict::classify(margin, tolerance, scale),
            margin,
            scale,
            tolerance,
            details: BTreeMap::new(),
        }
    }

    /// Outcome of the claim `A <= B` for a comparison of `A` against `B`.
    pub fn from_loewner_le(check_id: impl Into<String>, v: &LoewnerVerdict) -> Self {
        Self::from_margin(check_id, v.le_margin, v.scale, v.tolerance)
    }

    /// Outcome of the claim `A >= B` for a comparison of `A` against `B`.
    pub fn from_loewner_ge(check_id: impl Into<String>, v: &LoewnerVerdict) -> Self {
        Self::from_margin(check_id, v.ge_margin, v.scale, v.tolerance)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.instance_seed = seed;
        self
    }

    pub fn with_detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    pub fn with_id(mut self, check_id: impl Into<String>) -> Self {
        self.check_id = check_id.into();
        self
    }

    /// Margin divided by scale (the margin itself when scale is zero).
    pub fn relative_margin(&self) -> f64 {
        if self.scale > 0.0 {
            self.margin / self.scale
        } else {
            self.margin
        }
    }

    /// Verdict of the stored margin under a different tolerance.
    pub fn reclassified(&self, tolerance: f64) -> Verdict {
        Verdict::classify(self.margin, tolerance, self.scale)
    }

    /// Folds several component outcomes into one: the verdict and margin are
    /// those of the worst component; every component's margin and scale are
    /// kept in `details` under its id.
    pub fn worst_of(check_id: impl Into<String>, components: Vec<CheckOutcome>) -> Self {
        assert!(!components.is_empty(), "worst_of: no components");
        let mut details = BTreeMap::new();
        for c in &components {
            details.insert(format!("{}.margin", c.check_id), c.margin);
            details.insert(format!("{}.scale", c.check_id), c.scale);
            for (k, v) in &c.details {
                details.insert(format!("{}.{}", c.check_id, k), *v);
            }
        }
        let worst = components
            .into_iter()
            .max_by(|a, b| {
                a.verdict
                    .cmp(&b.verdict)
                    .then(b.relative_margin().total_cmp(&a.relative_margin()))
            })
            .expect("non-empty");
        Self {
            check_id: check_id.into(),
            details,
            ..worst
        }
    }

    pub fn is_fail(&self) -> bool {
        self.verdict.is_fail()
    }
}

impl core::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{} seed={} {:?} margin={:e} scale={:e}",
            self.check_id, self.instance_seed, self.verdict, self.margin, self.scale
        )
    }
}

/// Label used in reports.
pub fn verdict_label(v: Verdict) -> String {
    match v {
        Verdict::Pass => "pass",
        Verdict::Marginal => "marginal",
        Verdict::Fail => "fail",
    }
    .to_string()
}
