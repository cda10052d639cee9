use opconv_core::funcalc::{FunctionForm, MixtureTerm, ScalarFunctionSpec};
use opconv_core::matrix::{max_abs, DEFAULT_LOEWNER_TOL};
use opconv_core::means::{geometric_mean, MeanKind};
use opconv_core::outcome::Verdict;
use opconv_core::posmaps::{MapDescriptor, PositiveMapSpec, StateSource};
use opconv_core::random::{derive_seed, random_pd_in, rng_from_seed, InstanceRng};
use opconv_core::verifier::*;
use opconv_core::{CMatrix, Complex64, Error, PositiveDefiniteMatrix};

const TOL: f64 = DEFAULT_LOEWNER_TOL;

fn pair(dim: usize, rng: &mut InstanceRng) -> (PositiveDefiniteMatrix, PositiveDefiniteMatrix) {
    (random_pd_in(dim, 1e-2, 1e2, rng), random_pd_in(dim, 1e-2, 1e2, rng))
}

fn congruence(dim: usize, seed: u64) -> PositiveMapSpec {
    MapDescriptor::CongruenceSum { terms: 2, out: None, seed }.build(dim).unwrap()
}

fn seeded_state(dim: usize, seed: u64) -> PositiveMapSpec {
    MapDescriptor::State(StateSource::Seed(seed)).build(dim).unwrap()
}

/// `Tr(ρ M)` through the map's own evaluation on a 1x1 output.
fn scalar(phi: &PositiveMapSpec, m: &CMatrix) -> f64 {
    phi.apply_general(m).unwrap()[(0, 0)].re
}

fn inverse(m: &CMatrix) -> CMatrix {
    m.clone().try_inverse().unwrap()
}

/// `((X^-1 + Y^-1)/2)^-1` by plain LU inversion.
fn harmonic_by_lu(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> CMatrix {
    inverse(&((inverse(x.as_matrix()) + inverse(y.as_matrix())) * Complex64::new(0.5, 0.0)))
}

#[test]
fn main_convexity_equality_case() {
    let f = ScalarFunctionSpec::power(-1.0).unwrap();
    let g = ScalarFunctionSpec::neg_inverse();
    let phi = PositiveMapSpec::identity(3);
    let mut rng = rng_from_seed(1);
    let (x, y) = pair(3, &mut rng);
    for (a, b) in [(&x, &x), (&x, &y)] {
        let o = check_main_convexity(&g, &f, &phi, a, b, TOL).unwrap();
        assert_ne!(o.verdict, Verdict::Fail);
        assert!(o.margin.abs() <= 1e-12 * o.scale, "{o}");
    }
}

#[test]
fn main_convexity_state_inverse_passes() {
    let f = ScalarFunctionSpec::power(-1.0).unwrap();
    let g = ScalarFunctionSpec::neg_inverse();
    for i in 0..200 {
        let mut rng = rng_from_seed(derive_seed(2, "state", i));
        let dim = 2 + (i as usize % 4);
        let phi = seeded_state(dim, i);
        let (x, y) = pair(dim, &mut rng);
        let o = check_main_convexity(&g, &f, &phi, &x, &y, TOL).unwrap();
        assert_eq!(o.verdict, Verdict::Pass, "{o}");
        // 1x1 output: the margin is Φ(X^-1)^-1 ▽ Φ(Y^-1)^-1 - Φ((X▽Y)^-1)^-1.
        let w = |m: &PositiveDefiniteMatrix| scalar(&phi, &inverse(m.as_matrix())).recip();
        let mid = (x.as_matrix() + y.as_matrix()) * Complex64::new(0.5, 0.0);
        let oracle = 0.5 * (-w(&x) - w(&y)) + scalar(&phi, &inverse(&mid)).recip();
        assert!((o.margin - oracle).abs() <= 1e-8 * o.scale, "{} vs {oracle}", o.margin);
    }
}

/// Second differences of `t -> Tr g(Φ(f(X_t)))` on a dense grid.
fn dense_trace_convexity(
    g: &ScalarFunctionSpec,
    f: &ScalarFunctionSpec,
    phi: &PositiveMapSpec,
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
) -> f64 {
    let n = 40;
    let vals: Vec<f64> = (0..=n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let p = convex_combination(x, y, t).unwrap();
            let img = phi.apply_pd(&f.apply_positive(&p).unwrap()).unwrap();
            g.apply(&img).unwrap().trace()
        })
        .collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    vals.windows(3).map(|w| (w[0] + w[2] - 2.0 * w[1]) / scale).fold(f64::INFINITY, f64::min)
}

#[test]
fn main_convexity_resolvent_log_congruence() {
    let f = ScalarFunctionSpec::resolvent(0.5).unwrap();
    let g = ScalarFunctionSpec::log();
    for i in 0..100 {
        let mut rng = rng_from_seed(derive_seed(3, "cong", i));
        let phi = congruence(4, i);
        let (x, y) = pair(4, &mut rng);
        let o = check_main_convexity(&g, &f, &phi, &x, &y, TOL).unwrap();
        assert!(!o.is_fail(), "{o}");
        if i < 10 {
            assert!(dense_trace_convexity(&g, &f, &phi, &x, &y) >= -1e-9);
        }
    }
}

#[test]
fn main_convexity_gates() {
    let phi = PositiveMapSpec::identity(2);
    let x = PositiveDefiniteMatrix::identity(2);
    let cube = ScalarFunctionSpec::unclassified(FunctionForm::Power(3.0)).unwrap();
    let res = ScalarFunctionSpec::resolvent(0.0).unwrap();
    assert!(matches!(
        check_main_convexity(&cube, &res, &phi, &x, &x, TOL),
        Err(Error::ClassViolation(_))
    ));
    assert!(matches!(
        check_main_convexity(&ScalarFunctionSpec::log(), &ScalarFunctionSpec::log(), &phi, &x, &x, TOL),
        Err(Error::ClassViolation(_))
    ));
    let three = PositiveDefiniteMatrix::identity(3);
    assert!(matches!(
        check_main_convexity(&ScalarFunctionSpec::log(), &res, &phi, &x, &three, TOL),
        Err(Error::DimensionMismatch { .. })
    ));
    let mut k = CMatrix::zeros(2, 2);
    k[(1, 0)] = Complex64::new(1.0, 0.0);
    let degenerate = PositiveMapSpec::congruence_sum(vec![k]).unwrap();
    assert!(matches!(
        check_main_convexity(&ScalarFunctionSpec::log(), &res, &degenerate, &x, &x, TOL),
        Err(Error::NotStrictlyPositive { .. })
    ));
    // The ungated probe accepts the unclassified cube.
    assert!(main_convexity_probe(&cube, &res, &phi, &x, &x, TOL).is_ok());
}

#[test]
fn cube_control_is_detected() {
    let cube = ScalarFunctionSpec::unclassified(FunctionForm::Power(3.0)).unwrap();
    let res = ScalarFunctionSpec::resolvent(0.0).unwrap();
    let phi = PositiveMapSpec::identity(2);
    let fails = (0..500)
        .filter(|&i| {
            let mut rng = rng_from_seed(derive_seed(9, "control", i));
            let (x, y) = pair(2, &mut rng);
            main_convexity_probe(&cube, &res, &phi, &x, &y, TOL).unwrap().is_fail()
        })
        .count();
    assert!(fails > 0);
}

#[test]
fn proof_chain_equal_inputs() {
    let f = ScalarFunctionSpec::resolvent(1.0).unwrap();
    let g = ScalarFunctionSpec::power(0.5).unwrap();
    let phi = congruence(3, 4);
    let x = random_pd_in(3, 1e-2, 1e2, &mut rng_from_seed(5));
    let chain = check_proof_chain(&g, &f, &phi, &x, &x, TOL).unwrap();
    for link in &chain.links {
        assert_ne!(link.verdict, Verdict::Fail);
        assert!(link.margin.abs() <= 1e-12 * link.scale.max(1.0), "{link}");
    }
}

#[test]
fn proof_chain_pinching_instance() {
    let f = ScalarFunctionSpec::resolvent(1.0).unwrap();
    let g = ScalarFunctionSpec::power(0.5).unwrap();
    let phi = PositiveMapSpec::pinching(vec![2, 2]).unwrap();
    for i in 0..100 {
        let mut rng = rng_from_seed(derive_seed(6, "pinch", i));
        let (x, y) = pair(4, &mut rng);
        let chain = check_proof_chain(&g, &f, &phi, &x, &y, TOL).unwrap();
        assert!(!chain.any_fail());
        assert!(!chain.mean_ordering.is_fail(), "{}", chain.mean_ordering);
        let main = check_main_convexity(&g, &f, &phi, &x, &y, TOL).unwrap();
        assert!(!main.is_fail());
        assert!(!check_chain_implies_main(&chain, &main, TOL).is_fail());
        assert!(main.margin >= chain.composed_margin() - TOL * main.scale);
    }
}

#[test]
fn proof_chain_gate() {
    let x = PositiveDefiniteMatrix::identity(2);
    let cube = ScalarFunctionSpec::unclassified(FunctionForm::Power(3.0)).unwrap();
    let r = check_proof_chain(&cube, &ScalarFunctionSpec::resolvent(1.0).unwrap(), &PositiveMapSpec::identity(2), &x, &x, TOL);
    assert!(matches!(r, Err(Error::ClassViolation(_))));
}

#[test]
fn harmonic_subadditivity_identity_is_equality() {
    let mut rng = rng_from_seed(7);
    let (x, y) = pair(3, &mut rng);
    let o = check_harmonic_subadditivity(&PositiveMapSpec::identity(3), &x, &y, TOL).unwrap();
    assert!(!o.is_fail());
    assert!(o.details["outer.margin"].abs() <= 1e-12 * o.details["outer.scale"]);
    assert!(o.details["inner.margin"].abs() <= 1e-11 * o.details["inner.scale"]);
}

#[test]
fn harmonic_subadditivity_state_scalar_oracle() {
    for i in 0..200 {
        let mut rng = rng_from_seed(derive_seed(8, "state", i));
        let dim = 2 + (i as usize % 3);
        let phi = seeded_state(dim, i);
        let (x, y) = pair(dim, &mut rng);
        let o = check_harmonic_subadditivity(&phi, &x, &y, TOL).unwrap();
        assert!(!o.is_fail(), "{o}");
        let a = scalar(&phi, x.as_matrix());
        let b = scalar(&phi, y.as_matrix());
        let oracle = 2.0 * a * b / (a + b) - scalar(&phi, &harmonic_by_lu(&x, &y));
        assert!(oracle >= -1e-12 * a.max(b));
        assert!((o.details["outer.margin"] - oracle).abs() <= 1e-8 * a.max(b));
    }
}

#[test]
fn harmonic_subadditivity_congruence_5x5() {
    for i in 0..100 {
        let mut rng = rng_from_seed(derive_seed(10, "cong", i));
        let (x, y) = pair(5, &mut rng);
        let o = check_harmonic_subadditivity(&congruence(5, i), &x, &y, TOL).unwrap();
        assert!(!o.is_fail(), "{o}");
    }
}

#[test]
fn f_mean_inequality_examples() {
    let mut rng = rng_from_seed(11);
    let x = random_pd_in(3, 1e-2, 1e2, &mut rng);
    let mix = ScalarFunctionSpec::decreasing_mixture(
        0.2,
        vec![MixtureTerm { weight: 1.0, shift: 0.3 }, MixtureTerm { weight: 0.5, shift: 2.0 }],
    )
    .unwrap();
    let same = check_f_mean_inequality(&mix, &x, &x, TOL).unwrap();
    assert!(same.margin.abs() <= 1e-12 * same.scale);

    // x^-1 turns the arithmetic mean into the harmonic mean of the inverses.
    let inv = ScalarFunctionSpec::resolvent(0.0).unwrap();
    let dx = PositiveDefiniteMatrix::from_diagonal(&[0.5, 3.0, 40.0]).unwrap();
    let dy = PositiveDefiniteMatrix::from_diagonal(&[2.0, 0.1, 7.0]).unwrap();
    let o = check_f_mean_inequality(&inv, &dx, &dy, TOL).unwrap();
    assert_ne!(o.verdict, Verdict::Fail);
    assert!(o.margin.abs() <= 1e-12 * o.scale);

    for i in 0..100 {
        let mut rng = rng_from_seed(derive_seed(12, "mix", i));
        let (x, y) = pair(4, &mut rng);
        assert!(!check_f_mean_inequality(&mix, &x, &y, TOL).unwrap().is_fail());
    }
    assert!(matches!(
        check_f_mean_inequality(&ScalarFunctionSpec::log(), &x, &x, TOL),
        Err(Error::ClassViolation(_))
    ));
}

#[test]
fn mean_subadditivity_examples() {
    for i in 0..100 {
        let mut rng = rng_from_seed(derive_seed(13, "means", i));
        let dim = 2 + (i as usize % 4);
        let (x, y) = pair(dim, &mut rng);

        let cong = congruence(dim, i);
        let a = check_mean_subadditivity(MeanKind::Arithmetic, &cong, &x, &y, TOL).unwrap();
        assert!(a.margin.abs() <= 1e-12 * a.scale, "{a}");

        let blocks = vec![1, dim - 1];
        let pinch = PositiveMapSpec::pinching(blocks).unwrap();
        assert!(!check_mean_subadditivity(MeanKind::Harmonic, &pinch, &x, &y, TOL).unwrap().is_fail());

        // Scalar oracle: ω(X#Y) <= sqrt(ω(X) ω(Y)), with X#Y certified by the
        // Riccati equation Z X^-1 Z = Y.
        let state = seeded_state(dim, i + 1000);
        let o = check_mean_subadditivity(MeanKind::Geometric, &state, &x, &y, TOL).unwrap();
        assert!(!o.is_fail(), "{o}");
        let z = geometric_mean(&x, &y).unwrap();
        let riccati = z.as_matrix() * inverse(x.as_matrix()) * z.as_matrix() - y.as_matrix();
        assert!(max_abs(&riccati) <= 1e-8 * y.operator_norm().max(1.0));
        let oracle = (scalar(&state, x.as_matrix()) * scalar(&state, y.as_matrix())).sqrt() - scalar(&state, z.as_matrix());
        assert!(oracle >= 0.0);
        assert!((o.margin - oracle).abs() <= 1e-9 * o.scale.max(1.0));
    }
    assert!(matches!("median".parse::<MeanKind>(), Err(Error::UnknownMean(_))));
}

#[test]
fn counterexample_matches_published_values() {
    let c = reproduce_counterexample();
    let expected = [[1.85834, -0.63486], [-0.63486, 0.52569]];
    for (i, row) in expected.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            assert!((c.s_geo_t.as_matrix()[(i, j)].re - v).abs() < 1e-4);
        }
    }
    assert!((c.eigenvalues.0 - 0.5786).abs() < 1e-3);
    assert!((c.eigenvalues.1 + 0.0159).abs() < 1e-3);
    assert!(c.eigenvalues.1 < -1e-3);
    assert_eq!(c.outcome.verdict, Verdict::Fail);
    assert!((c.outcome.margin - c.eigenvalues.1).abs() < 1e-12);
    // S and T are not comparable, so the failure is not a monotonicity artifact.
    let diff = c.t.base() - c.s.base();
    let ev = diff.eigenvalues().unwrap();
    assert!(ev[0] < 0.0 && ev[1] > 0.0);
}

#[test]
fn counterexample_is_deterministic() {
    let a = reproduce_counterexample();
    let b = reproduce_counterexample();
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert_eq!(a.difference, b.difference);
}

#[test]
fn scale_invariance_of_homogeneous_checks() {
    for i in 0..50 {
        let mut rng = rng_from_seed(derive_seed(14, "scale", i));
        let dim = 2 + (i as usize % 3);
        let phi = congruence(dim, i);
        let (x, y) = pair(dim, &mut rng);
        let base_h = check_harmonic_subadditivity(&phi, &x, &y, TOL).unwrap();
        let base_g = check_mean_subadditivity(MeanKind::Geometric, &phi, &x, &y, TOL).unwrap();
        for c in [0.01, 100.0] {
            let (cx, cy) = (x.scale(c).unwrap(), y.scale(c).unwrap());
            let h = check_harmonic_subadditivity(&phi, &cx, &cy, TOL).unwrap();
            let g = check_mean_subadditivity(MeanKind::Geometric, &phi, &cx, &cy, TOL).unwrap();
            assert_eq!(h.is_fail(), base_h.is_fail());
            assert_eq!(g.is_fail(), base_g.is_fail());
            assert!((h.relative_margin() - base_h.relative_margin()).abs() <= 1e-9);
            assert!((g.relative_margin() - base_g.relative_margin()).abs() <= 1e-9);
        }
    }
}

#[test]
fn tolerance_monotonicity_of_stored_margins() {
    let f = ScalarFunctionSpec::resolvent(0.2).unwrap();
    let g = ScalarFunctionSpec::log();
    for i in 0..50 {
        let mut rng = rng_from_seed(derive_seed(15, "tol", i));
        let (x, y) = pair(3, &mut rng);
        let o = check_main_convexity(&g, &f, &seeded_state(3, i), &x, &y, 1e-12).unwrap();
        for t in [1e-12, 1e-9, 1e-6, 1e-3] {
            if o.reclassified(1e-12) != Verdict::Fail {
                assert_ne!(o.reclassified(t), Verdict::Fail);
            }
        }
    }
}
