//! Checks of the convexity theorem, its lemmas and the trace-functional
//! results. Every check is a pure function of its inputs and returns a
//! [`CheckOutcome`] whose margin is the signed slack of the claimed
//! inequality.
//!
//! Operator inequalities `A <= B` use `λmin(B - A)` as margin. Scalar
//! convexity checks evaluate the functional at both ends of a segment and at
//! the grid `t = 0.1, ..., 0.9`, and report the smallest gap between chord
//! and value.

use alloc::format;

use crate::error::{Error, Result};
use crate::funcalc::{FunctionClass, ScalarFunctionSpec};
use crate::matrix::{loewner_compare, HermitianMatrix, PositiveDefiniteMatrix};
use crate::outcome::CheckOutcome;
use crate::posmaps::PositiveMapSpec;

mod theorem;
mod trace;

pub use theorem::*;
pub use trace::*;

/// Stable check identifiers used in outcomes and reports.
pub mod ids {
    pub const MAIN_CONVEXITY: &str = "main_convexity";
    pub const CHAIN_EQ1: &str = "proof_chain.eq1";
    pub const CHAIN_EQ2: &str = "proof_chain.eq2";
    pub const CHAIN_EQ3: &str = "proof_chain.eq3";
    pub const CHAIN_MEAN_ORDERING: &str = "proof_chain.mean_ordering";
    pub const CHAIN_IMPLIES_MAIN: &str = "chain_implies_main";
    pub const HARMONIC_SUBADDITIVITY: &str = "harmonic_subadditivity";
    pub const F_MEAN_INEQUALITY: &str = "f_mean_inequality";
    pub const MEAN_SUBADDITIVITY: &str = "mean_subadditivity";
    pub const GEOMETRIC_PATH: &str = "geometric_path";
    pub const SEPARATE_CONVEXITY: &str = "separate_convexity";
    pub const TRACE_SWITCH: &str = "trace_switch";
    pub const RESOLVENT_DERIVATIVES: &str = "resolvent_derivatives";
    pub const LIEB_CONVEXITY: &str = "lieb_convexity";
    pub const JOINT_CONVEXITY: &str = "joint_convexity";
}

/// Interior points of the segment grid.
pub const SEGMENT_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

pub(crate) fn require_class(f: &ScalarFunctionSpec, class: FunctionClass, role: &str) -> Result<()> {
    if f.class() == class {
        Ok(())
    } else {
        Err(Error::ClassViolation(format!(
            "{role} = {} must be declared {:?}, found {:?}",
            f.render(),
            class,
            f.class()
        )))
    }
}

pub(crate) fn require_strict(phi: &PositiveMapSpec) -> Result<()> {
    if phi.is_strictly_positive() {
        Ok(())
    } else {
        Err(Error::NotStrictlyPositive {
            margin: phi.strictness_margin(),
        })
    }
}

pub(crate) fn require_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Outcome of `lhs <= rhs`, with the scale widened by the norms of `extra`
/// (the summands of `rhs` when it is an average).
pub(crate) fn le_outcome(
    id: &str,
    lhs: &HermitianMatrix,
    rhs: &HermitianMatrix,
    extra: &[&HermitianMatrix],
    tol: f64,
) -> Result<CheckOutcome> {
    let v = loewner_compare(lhs, rhs, tol)?;
    let mut scale = v.scale;
    for m in extra {
        scale = scale.max(m.operator_norm()?);
    }
    Ok(CheckOutcome::from_margin(id, v.le_margin, scale, tol))
}

/// `(1 - t) P0 + t P1`.
pub fn convex_combination(
    p0: &PositiveDefiniteMatrix,
    p1: &PositiveDefiniteMatrix,
    t: f64,
) -> Result<PositiveDefiniteMatrix> {
    require_dim(p0.dim(), p1.dim())?;
    if t == 0.0 {
        return Ok(p0.clone());
    }
    if t == 1.0 {
        return Ok(p1.clone());
    }
    PositiveDefiniteMatrix::new(&p0.base().scale(1.0 - t) + &p1.base().scale(t))
}

/// Smallest chord-minus-value gap of a scalar function on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentGap {
    pub margin: f64,
    pub scale: f64,
    pub worst_t: f64,
}

/// Evaluates `value(t) -> (F(t), |F|-type magnitude)` at the endpoints and
/// on [`SEGMENT_GRID`].
pub fn segment_gap(mut value: impl FnMut(f64) -> Result<(f64, f64)>) -> Result<SegmentGap> {
    let (v0, s0) = value(0.0)?;
    let (v1, s1) = value(1.0)?;
    let mut gap = SegmentGap {
        margin: f64::INFINITY,
        scale: s0.max(s1),
        worst_t: 0.5,
    };
    for t in SEGMENT_GRID {
        let (vt, st) = value(t)?;
        let m = (1.0 - t) * v0 + t * v1 - vt;
        gap.scale = gap.scale.max(st);
        if m < gap.margin {
            gap.margin = m;
            gap.worst_t = t;
        }
    }
    Ok(gap)
}

impl SegmentGap {
    pub fn outcome(&self, id: &str, tol: f64) -> CheckOutcome {
        CheckOutcome::from_margin(id, self.margin, self.scale, tol).with_detail("worst_t", self.worst_t)
    }
}
