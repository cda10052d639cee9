use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::funcalc::{resolvent_first_derivative, resolvent_second_derivative, FunctionClass, ScalarFunctionSpec};
use crate::matrix::{max_abs, CMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use crate::outcome::CheckOutcome;
use crate::posmaps::{psd_sqrt, two_var_freeze, PositiveMapSpec, TracialFunctional};

use super::{convex_combination, ids, require_class, require_dim, require_strict, segment_gap};

/// Relative agreement required between an analytic first derivative and its
/// central difference.
pub const FIRST_DERIVATIVE_TOL: f64 = 1e-6;
/// Same for second derivatives.
pub const SECOND_DERIVATIVE_TOL: f64 = 1e-4;
/// Relative agreement of the two sides of the trace switch.
pub const TRACE_SWITCH_TOL: f64 = 1e-9;
/// Agreement of the direct and direct-sum margins in the joint check,
/// relative to `max(1, scale)`.
pub const JOINT_AGREEMENT_TOL: f64 = 1e-8;

/// Steps of the central differences, in units of `1 / (‖R‖ ‖Y‖)` where `R`
/// is the resolvent at `t = 0`.
const FIRST_STEP: f64 = 1e-5;
const SECOND_STEP: f64 = 3e-3;

/// Which argument of the two-variable functional is held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedVariable {
    First,
    Second,
}

/// Sum and absolute sum of `h` over the spectrum of `m`.
fn trace_of_function(h: &ScalarFunctionSpec, m: &HermitianMatrix) -> Result<(f64, f64)> {
    let mut value = 0.0;
    let mut magnitude = 0.0;
    for lambda in m.eigenvalues()? {
        let v = h.eval(lambda)?;
        value += v;
        magnitude += v.abs();
    }
    Ok((value, magnitude))
}

/// `Tr g(Φ(f1(X))^{1/2} Ψ(f2(Y)) Φ(f1(X))^{1/2})` and the absolute sum
/// over the spectrum.
pub fn two_var_value(
    f1: &ScalarFunctionSpec,
    f2: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    psi: &PositiveMapSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
) -> Result<(f64, f64)> {
    let frozen = two_var_freeze(phi, &f1.apply_positive(x)?, psi)?;
    trace_of_function(g, &frozen.apply(&f2.apply(y)?)?)
}

/// Convexity of the two-variable trace functional in one argument, the
/// other held at `anchor`; the free argument runs from `p0` to `p1`.
#[allow(clippy::too_many_arguments)]
pub fn check_separate_convexity_two_var(
    f1: &ScalarFunctionSpec,
    f2: &ScalarFunctionSpec,
    g: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    psi: &PositiveMapSpec,
    fixed: FixedVariable,
    anchor: &PositiveDefiniteMatrix,
    p0: &PositiveDefiniteMatrix,
    p1: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    require_class(f1, FunctionClass::OmdPos, "f1")?;
    require_class(f2, FunctionClass::OmdPos, "f2")?;
    require_class(g, FunctionClass::Om, "g")?;
    require_strict(phi)?;
    require_strict(psi)?;
    require_dim(phi.out_dim(), psi.out_dim())?;
    let (fixed_dim, free_dim) = match fixed {
        FixedVariable::First => (phi.in_dim(), psi.in_dim()),
        FixedVariable::Second => (psi.in_dim(), phi.in_dim()),
    };
    require_dim(fixed_dim, anchor.dim())?;
    require_dim(free_dim, p0.dim())?;
    require_dim(free_dim, p1.dim())?;
    let gap = segment_gap(|t| {
        let p = convex_combination(p0, p1, t)?;
        match fixed {
            FixedVariable::First => two_var_value(f1, f2, g, phi, psi, anchor, &p),
            FixedVariable::Second => two_var_value(f1, f2, g, phi, psi, &p, anchor),
        }
    })?;
    Ok(gap.outcome(ids::SEPARATE_CONVEXITY, tol))
}

/// `Tr h(P^{1/2} Q P^{1/2}) = Tr h(Q^{1/2} P Q^{1/2})`. The margin is
/// `TRACE_SWITCH_TOL * scale - |difference|` with the scale the larger
/// absolute spectral sum of `h` on either side.
pub fn check_trace_switch(
    p: &PositiveDefiniteMatrix,
    q: &PositiveDefiniteMatrix,
    h: &ScalarFunctionSpec,
    tol: f64,
) -> Result<CheckOutcome> {
    require_dim(p.dim(), q.dim())?;
    let left = q.base().sandwich(p.sqrt().as_matrix());
    let right = p.base().sandwich(q.sqrt().as_matrix());
    let (a, sa) = trace_of_function(h, &left)?;
    let (b, sb) = trace_of_function(h, &right)?;
    let scale = sa.max(sb);
    let diff = (a - b).abs();
    let relative = if scale > 0.0 { diff / scale } else { diff };

    let el = left.eigenvalues()?;
    let er = right.eigenvalues()?;
    let top = el[el.len() - 1].abs().max(er[er.len() - 1].abs());
    let spectral_gap = el.iter().zip(&er).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max) / top;

    Ok(
        CheckOutcome::from_margin(ids::TRACE_SWITCH, TRACE_SWITCH_TOL * scale - diff, scale, tol)
            .with_detail("lhs", a)
            .with_detail("rhs", b)
            .with_detail("relative_difference", relative)
            .with_detail("spectral_difference", spectral_gap),
    )
}

fn relative_error(approx: &CMatrix, exact: &CMatrix) -> f64 {
    let err = max_abs(&(approx - exact));
    let size = max_abs(exact);
    if size > 0.0 {
        err / size
    } else {
        err
    }
}

/// `(l + X + tY)^{-1}`.
fn shifted_resolvent(
    shift: f64,
    x: &PositiveDefiniteMatrix,
    y: &HermitianMatrix,
    t: f64,
) -> Result<PositiveDefiniteMatrix> {
    let moved = x.base() + &y.scale(t);
    let shifted = &moved + &HermitianMatrix::identity(x.dim()).scale(shift);
    Ok(PositiveDefiniteMatrix::new(shifted)?.inverse())
}

/// Central-difference step for a resolvent at shift `l`, scaled so that
/// `t ‖R‖ ‖Y‖` equals `unit`.
fn step_for(shifts: &[f64], x: &PositiveDefiniteMatrix, y: &HermitianMatrix, unit: f64) -> Result<f64> {
    let y_norm = y.operator_norm()?;
    let r_norm = shifts
        .iter()
        .map(|l| (l + x.min_eigenvalue()).recip())
        .fold(0.0, f64::max);
    Ok(if y_norm > 0.0 { unit / (r_norm * y_norm) } else { unit })
}

/// Analytic first and second derivatives of `t -> (l + X + tY)^{-1}` at
/// `t = 0` against central differences.
pub fn check_resolvent_derivatives(
    shift: f64,
    x: &PositiveDefiniteMatrix,
    y: &HermitianMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    let d1 = resolvent_first_derivative(shift, x, y)?;
    let d2 = resolvent_second_derivative(shift, x, y)?;
    let r0 = shifted_resolvent(shift, x, y, 0.0)?;

    let h1 = step_for(&[shift], x, y, FIRST_STEP)?;
    let fd1 = (shifted_resolvent(shift, x, y, h1)?.as_matrix() - shifted_resolvent(shift, x, y, -h1)?.as_matrix())
        / Complex64::new(2.0 * h1, 0.0);
    let h2 = step_for(&[shift], x, y, SECOND_STEP)?;
    let fd2 = (shifted_resolvent(shift, x, y, h2)?.as_matrix() + shifted_resolvent(shift, x, y, -h2)?.as_matrix()
        - r0.as_matrix() * Complex64::new(2.0, 0.0))
        / Complex64::new(h2 * h2, 0.0);

    let e1 = relative_error(&fd1, d1.as_matrix());
    let e2 = relative_error(&fd2, d2.as_matrix());
    let first = CheckOutcome::from_margin("first", FIRST_DERIVATIVE_TOL - e1, 1.0, tol).with_detail("relative_error", e1);
    let second =
        CheckOutcome::from_margin("second", SECOND_DERIVATIVE_TOL - e2, 1.0, tol).with_detail("relative_error", e2);
    Ok(CheckOutcome::worst_of(ids::RESOLVENT_DERIVATIVES, vec![first, second]))
}

fn resolvent_shift_of(f: &ScalarFunctionSpec, role: &str) -> Result<f64> {
    f.resolvent_shift()
        .ok_or_else(|| Error::ClassViolation(alloc::format!("{role} = {} is not of the form 1/(l + x)", f.render())))
}

/// `τ(A K* B K)`.
fn tau_pair(tau: &TracialFunctional, a: &HermitianMatrix, k: &CMatrix, b: &HermitianMatrix) -> f64 {
    tau.eval_real(&(a.as_matrix() * k.adjoint() * b.as_matrix() * k))
}

/// `τ(Φ(f1(X)) K* Φ(f2(X)) K)`.
pub fn lieb_value(
    f1: &ScalarFunctionSpec,
    f2: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    tau: &TracialFunctional,
    k: &CMatrix,
    x: &PositiveDefiniteMatrix,
) -> Result<f64> {
    let a = phi.apply(&f1.apply(x)?)?;
    let b = phi.apply(&f2.apply(x)?)?;
    Ok(tau_pair(tau, &a, k, &b))
}

/// The three terms of `h''(0)` for `h(t) = τ(Φ(f1(X+tY)) K* Φ(f2(X+tY)) K)`
/// with resolvent `f1`, `f2`:
/// `τ(Φ(f1'') K* Φ(f2) K)`, `2 τ(Φ(f1') K* Φ(f2') K)`, `τ(Φ(f1) K* Φ(f2'') K)`.
pub fn lieb_second_derivative_terms(
    f1: &ScalarFunctionSpec,
    f2: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    tau: &TracialFunctional,
    k: &CMatrix,
    x: &PositiveDefiniteMatrix,
    y: &HermitianMatrix,
) -> Result<[f64; 3]> {
    let l1 = resolvent_shift_of(f1, "f1")?;
    let l2 = resolvent_shift_of(f2, "f2")?;
    let p = |m: &HermitianMatrix| phi.apply(m);
    let a0 = p(&f1.apply(x)?)?;
    let b0 = p(&f2.apply(x)?)?;
    let a1 = p(&resolvent_first_derivative(l1, x, y)?)?;
    let b1 = p(&resolvent_first_derivative(l2, x, y)?)?;
    let a2 = p(&resolvent_second_derivative(l1, x, y)?)?;
    let b2 = p(&resolvent_second_derivative(l2, x, y)?)?;
    Ok([
        tau_pair(tau, &a2, k, &b0),
        2.0 * tau_pair(tau, &a1, k, &b1),
        tau_pair(tau, &a0, k, &b2),
    ])
}

fn check_lieb_inputs(
    phi: &PositiveMapSpec,
    k: &CMatrix,
    x: &PositiveDefiniteMatrix,
    y: &HermitianMatrix,
    partner: &PositiveDefiniteMatrix,
) -> Result<()> {
    require_dim(phi.in_dim(), x.dim())?;
    require_dim(phi.in_dim(), y.dim())?;
    require_dim(phi.in_dim(), partner.dim())?;
    require_dim(phi.out_dim(), k.nrows())?;
    require_dim(phi.out_dim(), k.ncols())
}

/// Convexity of `X -> τ(Φ(f1(X)) K* Φ(f2(X)) K)` for resolvent `f1`, `f2`:
/// `h''(0) >= 0` along `Y` from the analytic expansion, agreement of that
/// expansion with a second central difference, and chord convexity on the
/// segment from `X` to `partner`.
#[allow(clippy::too_many_arguments)]
pub fn check_lieb_convexity(
    f1: &ScalarFunctionSpec,
    f2: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    tau: &TracialFunctional,
    k: &CMatrix,
    x: &PositiveDefiniteMatrix,
    y: &HermitianMatrix,
    partner: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    check_lieb_inputs(phi, k, x, y, partner)?;
    let terms = lieb_second_derivative_terms(f1, f2, phi, tau, k, x, y)?;
    let h2: f64 = terms.iter().sum();
    let h2_scale: f64 = terms.iter().map(|t| t.abs()).sum();
    let hessian = CheckOutcome::from_margin("hessian", h2, h2_scale, tol)
        .with_detail("h2", h2)
        .with_detail("term1", terms[0])
        .with_detail("term2", terms[1])
        .with_detail("term3", terms[2]);

    let shifts = [resolvent_shift_of(f1, "f1")?, resolvent_shift_of(f2, "f2")?];
    let step = step_for(&shifts, x, y, SECOND_STEP)?;
    let at = |t: f64| -> Result<f64> {
        let moved = PositiveDefiniteMatrix::new(x.base() + &y.scale(t))?;
        lieb_value(f1, f2, phi, tau, k, &moved)
    };
    let fd = (at(step)? + at(-step)? - 2.0 * at(0.0)?) / (step * step);
    let denom = h2.abs().max(fd.abs());
    let fd_err = if denom > 0.0 { (fd - h2).abs() / denom } else { 0.0 };
    let finite_difference = CheckOutcome::from_margin("finite_difference", SECOND_DERIVATIVE_TOL - fd_err, 1.0, tol)
        .with_detail("fd", fd)
        .with_detail("relative_error", fd_err);

    let gap = segment_gap(|t| {
        let v = lieb_value(f1, f2, phi, tau, k, &convex_combination(x, partner, t)?)?;
        Ok((v, v.abs()))
    })?;
    let midpoint = gap.outcome("midpoint", tol);
    Ok(CheckOutcome::worst_of(
        ids::LIEB_CONVEXITY,
        vec![hessian, finite_difference, midpoint],
    ))
}

/// `τ(Φ(f1(X))^{1/2} Ψ(f2(Y)) Φ(f1(X))^{1/2})`.
#[allow(clippy::too_many_arguments)]
pub fn joint_value_direct(
    f1: &ScalarFunctionSpec,
    f2: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    psi: &PositiveMapSpec,
    tau: &TracialFunctional,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
) -> Result<f64> {
    let c = psd_sqrt(&phi.apply(&f1.apply(x)?)?)?;
    let inner = psi.apply(&f2.apply(y)?)?;
    Ok(tau.eval_real(inner.sandwich(c.as_matrix()).as_matrix()))
}

/// `K = [[0, 0], [I, 0]]` in `M_2(M_k)`.
pub fn embedding_k(k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2 * k, 2 * k);
    m.view_mut((k, 0), (k, k)).fill_with_identity();
    m
}

/// The same functional as [`joint_value_direct`], computed as
/// `(τ ⊗ Tr)(Φ̃(f1(Z)) K* Φ̃(f2(Z)) K)` with `Z = X ⊕ Y`, `Φ̃ = Φ ⊕ Ψ`.
pub fn joint_value_embedded(
    f1: &ScalarFunctionSpec,
    f2: &ScalarFunctionSpec,
    embedded: &PositiveMapSpec,
    tau: &TracialFunctional,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
) -> Result<f64> {
    let z = x.direct_sum(y);
    let k = embedding_k(embedded.out_dim() / 2);
    lieb_value(f1, f2, embedded, tau, &k, &z)
}

/// Midpoint-and-grid joint convexity of
/// `(X, Y) -> τ(Φ(f1(X))^{1/2} Ψ(f2(Y)) Φ(f1(X))^{1/2})` between two
/// points, evaluated directly and through the direct-sum embedding. The
/// two margins must agree within `JOINT_AGREEMENT_TOL * max(1, scale)`.
#[allow(clippy::too_many_arguments)]
pub fn check_joint_convexity(
    f1: &ScalarFunctionSpec,
    f2: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    psi: &PositiveMapSpec,
    tau: &TracialFunctional,
    first: (&PositiveDefiniteMatrix, &PositiveDefiniteMatrix),
    second: (&PositiveDefiniteMatrix, &PositiveDefiniteMatrix),
    tol: f64,
) -> Result<CheckOutcome> {
    require_class(f1, FunctionClass::OmdPos, "f1")?;
    require_class(f2, FunctionClass::OmdPos, "f2")?;
    require_dim(phi.out_dim(), psi.out_dim())?;
    for (x, y) in [first, second] {
        require_dim(phi.in_dim(), x.dim())?;
        require_dim(psi.in_dim(), y.dim())?;
    }
    let point = |t: f64| -> Result<(PositiveDefiniteMatrix, PositiveDefiniteMatrix)> {
        Ok((
            convex_combination(first.0, second.0, t)?,
            convex_combination(first.1, second.1, t)?,
        ))
    };
    let direct = segment_gap(|t| {
        let (x, y) = point(t)?;
        let v = joint_value_direct(f1, f2, phi, psi, tau, &x, &y)?;
        Ok((v, v.abs()))
    })?;
    let embedded_map = PositiveMapSpec::direct_sum(phi.clone(), psi.clone());
    let embedded = segment_gap(|t| {
        let (x, y) = point(t)?;
        let v = joint_value_embedded(f1, f2, &embedded_map, tau, &x, &y)?;
        Ok((v, v.abs()))
    })?;

    let scale = direct.scale.max(embedded.scale).max(1.0);
    let disagreement = (direct.margin - embedded.margin).abs();
    let agreement = CheckOutcome::from_margin("agreement", JOINT_AGREEMENT_TOL * scale - disagreement, scale, tol)
        .with_detail("difference", disagreement);
    let components: Vec<CheckOutcome> = vec![direct.outcome("direct", tol), embedded.outcome("embedded", tol), agreement];
    Ok(CheckOutcome::worst_of(ids::JOINT_CONVEXITY, components))
}
