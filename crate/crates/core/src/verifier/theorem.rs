use alloc::vec;

use crate::error::Result;
use crate::funcalc::{FunctionClass, ScalarFunctionSpec};
use crate::matrix::{HermitianMatrix, PositiveDefiniteMatrix};
use crate::means::{arithmetic_mean, geometric_mean_checked, harmonic_mean_checked, MeanKind};
use crate::outcome::CheckOutcome;
use crate::posmaps::PositiveMapSpec;

use super::{ids, le_outcome, require_class, require_dim, require_strict};

/// `X ! Y` with the discrepancy between its two formulas, never rejected.
fn harmonic(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<(PositiveDefiniteMatrix, f64)> {
    harmonic_mean_checked(x, y, f64::INFINITY)
}

fn gate_theorem(
    g: &ScalarFunctionSpec,
    f: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
) -> Result<()> {
    require_class(f, FunctionClass::OmdPos, "f")?;
    require_class(g, FunctionClass::Om, "g")?;
    check_inputs(phi, x, y)
}

fn check_inputs(phi: &PositiveMapSpec, x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<()> {
    require_strict(phi)?;
    require_dim(phi.in_dim(), x.dim())?;
    require_dim(phi.in_dim(), y.dim())
}

/// `Φ(f(X))`.
fn inner(f: &ScalarFunctionSpec, phi: &PositiveMapSpec, x: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
    phi.apply_pd(&f.apply_positive(x)?)
}

/// Midpoint form of the main inequality
/// `g(Φ(f(X ▽ Y))) <= g(Φ(f(X))) ▽ g(Φ(f(Y)))`
/// for `f` decreasing-positive, `g` monotone and `Φ` strictly positive.
pub fn check_main_convexity(
    g: &ScalarFunctionSpec,
    f: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    gate_theorem(g, f, phi, x, y)?;
    main_convexity_probe(g, f, phi, x, y, tol)
}

/// The main inequality without the class gate on `f` and `g`, for negative
/// controls with unclassified functions.
pub fn main_convexity_probe(
    g: &ScalarFunctionSpec,
    f: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    check_inputs(phi, x, y)?;
    let lhs = g.apply(&inner(f, phi, &arithmetic_mean(x, y)?)?)?;
    let a = g.apply(&inner(f, phi, x)?)?;
    let b = g.apply(&inner(f, phi, y)?)?;
    let rhs = (&a + &b).scale(0.5);
    le_outcome(ids::MAIN_CONVEXITY, &lhs, &rhs, &[&a, &b], tol)
}

/// The three links of the proof of the main inequality, plus the diagnostic
/// comparison of the harmonic intermediate with the geometric one.
#[derive(Clone, Debug)]
pub struct ProofChain {
    /// `g(Φ(f(X▽Y))) <= g(Φ(f(X)!f(Y)))`,
    /// `g(Φ(f(X)!f(Y))) <= g(Φ(f(X))!Φ(f(Y)))`,
    /// `g(Φ(f(X))!Φ(f(Y))) <= g(Φ(f(X))) ▽ g(Φ(f(Y)))`.
    pub links: [CheckOutcome; 3],
    /// `g(Φ(f(X)!f(Y))) <= g(Φ(f(X)) # Φ(f(Y)))`.
    pub mean_ordering: CheckOutcome,
}

impl ProofChain {
    pub fn any_fail(&self) -> bool {
        self.links.iter().any(CheckOutcome::is_fail)
    }

    /// Lower bound on the margin of the main inequality implied by the
    /// links: `λmin` is superadditive.
    pub fn composed_margin(&self) -> f64 {
        self.links.iter().map(|l| l.margin).sum()
    }
}

pub fn check_proof_chain(
    g: &ScalarFunctionSpec,
    f: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<ProofChain> {
    gate_theorem(g, f, phi, x, y)?;
    let fx = f.apply_positive(x)?;
    let fy = f.apply_positive(y)?;
    let px = phi.apply_pd(&fx)?;
    let py = phi.apply_pd(&fy)?;

    let lhs = g.apply(&inner(f, phi, &arithmetic_mean(x, y)?)?)?;
    let (f_harm, d1) = harmonic(&fx, &fy)?;
    let m1 = g.apply(&phi.apply_pd(&f_harm)?)?;
    let (p_harm, d2) = harmonic(&px, &py)?;
    let m2 = g.apply(&p_harm)?;
    let a = g.apply(&px)?;
    let b = g.apply(&py)?;
    let rhs = (&a + &b).scale(0.5);

    let eq1 = le_outcome(ids::CHAIN_EQ1, &lhs, &m1, &[], tol)?.with_detail("harmonic_self_check", d1);
    let eq2 = le_outcome(ids::CHAIN_EQ2, &m1, &m2, &[], tol)?.with_detail("harmonic_self_check", d2);
    let eq3 = le_outcome(ids::CHAIN_EQ3, &m2, &rhs, &[&a, &b], tol)?;

    let (p_geo, d3) = geometric_mean_checked(&px, &py, f64::INFINITY)?;
    let geo = g.apply(&p_geo)?;
    let ordering =
        le_outcome(ids::CHAIN_MEAN_ORDERING, &m1, &geo, &[], tol)?.with_detail("geometric_symmetry", d3);
    Ok(ProofChain {
        links: [eq1, eq2, eq3],
        mean_ordering: ordering,
    })
}

/// Composition of the chain: the main margin is at least the sum of the link
/// margins, so passing links force a passing main check.
pub fn check_chain_implies_main(chain: &ProofChain, main: &CheckOutcome, tol: f64) -> CheckOutcome {
    let scale = chain.links.iter().fold(main.scale, |s, l| s.max(l.scale));
    let composed = chain.composed_margin();
    CheckOutcome::from_margin(ids::CHAIN_IMPLIES_MAIN, main.margin - composed, scale, tol)
        .with_detail("main_margin", main.margin)
        .with_detail("composed_margin", composed)
}

/// `Φ(X ! Y) <= Φ(X) ! Φ(Y)` together with the inner step
/// `Φ(X (X+Y)^{-1} X) >= Φ(X) Φ(X+Y)^{-1} Φ(X)`; the outcome is the worse of
/// the two.
pub fn check_harmonic_subadditivity(
    phi: &PositiveMapSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    check_inputs(phi, x, y)?;
    let (xy, _) = harmonic(x, y)?;
    let px = phi.apply_pd(x)?;
    let py = phi.apply_pd(y)?;
    let (pxy, _) = harmonic(&px, &py)?;
    let outer = le_outcome("outer", &phi.apply(xy.base())?, pxy.base(), &[], tol)?;

    let sum = PositiveDefiniteMatrix::new(x.base() + y.base())?;
    let inner_arg = sum.inverse().base().sandwich(x.as_matrix());
    let lhs = phi.apply(&inner_arg)?;
    let psum = phi.apply_pd(&sum)?;
    let rhs = psum.inverse().base().sandwich(px.as_matrix());
    let inner_step = le_outcome("inner", &rhs, &lhs, &[], tol)?;
    Ok(CheckOutcome::worst_of(ids::HARMONIC_SUBADDITIVITY, vec![outer, inner_step]))
}

/// `f(X ▽ Y) <= f(X) ! f(Y)` for decreasing-positive `f`.
pub fn check_f_mean_inequality(
    f: &ScalarFunctionSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    require_class(f, FunctionClass::OmdPos, "f")?;
    require_dim(x.dim(), y.dim())?;
    let lhs = f.apply(&arithmetic_mean(x, y)?)?;
    let (rhs, d) = harmonic(&f.apply_positive(x)?, &f.apply_positive(y)?)?;
    Ok(le_outcome(ids::F_MEAN_INEQUALITY, &lhs, rhs.base(), &[], tol)?.with_detail("harmonic_self_check", d))
}

/// `Φ(X σ Y) <= Φ(X) σ Φ(Y)` for a symmetric mean `σ`.
pub fn check_mean_subadditivity(
    mean: MeanKind,
    phi: &PositiveMapSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    check_inputs(phi, x, y)?;
    let combined = |a: &PositiveDefiniteMatrix, b: &PositiveDefiniteMatrix| -> Result<PositiveDefiniteMatrix> {
        match mean {
            MeanKind::Harmonic => harmonic(a, b).map(|(m, _)| m),
            MeanKind::Geometric => geometric_mean_checked(a, b, f64::INFINITY).map(|(m, _)| m),
            MeanKind::Arithmetic => arithmetic_mean(a, b),
        }
    };
    let lhs = phi.apply(combined(x, y)?.base())?;
    let rhs = combined(&phi.apply_pd(x)?, &phi.apply_pd(y)?)?;
    Ok(le_outcome(ids::MEAN_SUBADDITIVITY, &lhs, rhs.base(), &[], tol)?.with_id(mean_check_id(mean)))
}

fn mean_check_id(mean: MeanKind) -> alloc::string::String {
    alloc::format!("{}.{}", ids::MEAN_SUBADDITIVITY, mean.name())
}

/// The geometric-mean analogue of the main inequality,
/// `g(S # T) <= (g(S) + g(T)) / 2`, which does not hold in general.
pub fn check_geometric_path(
    g: &ScalarFunctionSpec,
    s: &PositiveDefiniteMatrix,
    t: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    let (st, _) = geometric_mean_checked(s, t, f64::INFINITY)?;
    let lhs = g.apply(&st)?;
    let a = g.apply(s)?;
    let b = g.apply(t)?;
    let rhs = (&a + &b).scale(0.5);
    le_outcome(ids::GEOMETRIC_PATH, &lhs, &rhs, &[&a, &b], tol)
}

/// `S = diag(1.1, 0.1)`.
pub fn counterexample_s() -> PositiveDefiniteMatrix {
    PositiveDefiniteMatrix::from_real_rows(&[&[1.1, 0.0], &[0.0, 0.1]]).expect("S is positive definite")
}

/// `T = [[7.17, -4.41], [-4.41, 3.13]]`.
pub fn counterexample_t() -> PositiveDefiniteMatrix {
    PositiveDefiniteMatrix::from_real_rows(&[&[7.17, -4.41], &[-4.41, 3.13]]).expect("T is positive definite")
}

/// The 2x2 pair on which `g = sqrt` breaks the geometric-mean path.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub s: PositiveDefiniteMatrix,
    pub t: PositiveDefiniteMatrix,
    pub s_geo_t: PositiveDefiniteMatrix,
    /// `(sqrt(S) + sqrt(T)) / 2 - sqrt(S # T)`.
    pub difference: HermitianMatrix,
    /// Eigenvalues of `difference`, larger first.
    pub eigenvalues: (f64, f64),
    pub outcome: CheckOutcome,
}

pub fn reproduce_counterexample() -> Counterexample {
    let s = counterexample_s();
    let t = counterexample_t();
    let g = ScalarFunctionSpec::power(0.5).expect("sqrt");
    let (s_geo_t, _) = geometric_mean_checked(&s, &t, f64::INFINITY).expect("geometric mean of S and T");
    let mean_of_roots = (s.sqrt().base() + t.sqrt().base()).scale(0.5);
    let difference = &mean_of_roots - s_geo_t.sqrt().base();
    let ev = difference.eigenvalues().expect("2x2 eigenvalues");
    let outcome = check_geometric_path(&g, &s, &t, crate::matrix::DEFAULT_LOEWNER_TOL).expect("2x2 check");
    Counterexample {
        s,
        t,
        s_geo_t,
        difference,
        eigenvalues: (ev[1], ev[0]),
        outcome,
    }
}
