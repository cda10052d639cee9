//! Positive linear maps between matrix algebras.
//!
//! A [`PositiveMapSpec`] is built from a handful of constructors (identity,
//! sums of congruences, states, pinchings, traces, conjugations and direct
//! sums). Every constructor yields a positive map; strict positivity is
//! decided once at construction from the smallest eigenvalue of `Φ(I)`.
//!
//! Direct sums act on block-diagonal matrices: the input of
//! `direct_sum(Φ, Ψ)` is `X ⊕ Y` embedded in `M_{m+n}`, and nonzero
//! off-diagonal blocks are rejected.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::funcalc::ScalarFunctionSpec;
use crate::matrix::{
    block_diagonal, loewner_compare, max_abs, CMatrix, HermitianMatrix, PositiveDefiniteMatrix, ASYM_TOL,
};
use crate::outcome::CheckOutcome;
use crate::random::{gaussian_matrix, random_pd, rng_from_seed};

/// `Φ` is strictly positive when `λmin(Φ(I)) > STRICT_TOL * ‖Φ(I)‖`.
pub const STRICT_TOL: f64 = 1e-8;

/// Max-entry agreement required of `Φ_u(I) = I` after unitalization.
pub const UNITAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum MapKind {
    Identity,
    /// `T -> Σ K_i* T K_i`, each `K_i` of shape `in x out`.
    CongruenceSum { kraus: Vec<CMatrix> },
    /// `T -> Tr(ρ T)` as a `1 x 1` matrix.
    State { density: PositiveDefiniteMatrix },
    /// Keeps the diagonal blocks of the given sizes, zeroes the rest.
    Pinching { blocks: Vec<usize> },
    /// `T -> B inner(A T A*) B*`; a missing factor is the identity.
    Conjugated {
        inner: Box<PositiveMapSpec>,
        input: Option<CMatrix>,
        output: Option<CMatrix>,
    },
    /// `X ⊕ Y -> Φ(X) ⊕ Ψ(Y)`.
    DirectSum {
        first: Box<PositiveMapSpec>,
        second: Box<PositiveMapSpec>,
    },
    /// `T -> c Tr(T)` as a `1 x 1` matrix.
    Trace { c: f64 },
}

#[derive(Clone, Debug)]
pub struct PositiveMapSpec {
    kind: MapKind,
    in_dim: usize,
    out_dim: usize,
    unit_margin: f64,
    strict: bool,
}

impl PositiveMapSpec {
    fn finish(kind: MapKind, in_dim: usize, out_dim: usize) -> Result<Self> {
        let mut spec = Self {
            kind,
            in_dim,
            out_dim,
            unit_margin: 0.0,
            strict: false,
        };
        let unit = spec.apply(&HermitianMatrix::identity(in_dim))?;
        let ev = unit.eigenvalues()?;
        let norm = ev[0].abs().max(ev[ev.len() - 1].abs());
        spec.unit_margin = ev[0];
        spec.strict = norm > 0.0 && ev[0] > STRICT_TOL * norm;
        Ok(spec)
    }

    pub fn identity(dim: usize) -> Self {
        Self::finish(MapKind::Identity, dim, dim).expect("identity map")
    }

    pub fn congruence_sum(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidArgument("congruence sum needs at least one factor".into()))?;
        let (rows, cols) = first.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("empty congruence factor".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: k.nrows(),
            });
        }
        Self::finish(MapKind::CongruenceSum { kraus }, rows, cols)
    }

    /// State `T -> Tr(ρ T)`; `ρ` must have unit trace.
    pub fn state(density: PositiveDefiniteMatrix) -> Result<Self> {
        let tr = density.base().trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("density matrix has trace {tr}, expected 1")));
        }
        let d = density.dim();
        Self::finish(MapKind::State { density }, d, 1)
    }

    /// The maximally mixed state `T -> Tr(T)/d`.
    pub fn uniform_state(dim: usize) -> Self {
        let rho = PositiveDefiniteMatrix::identity(dim)
            .scale(1.0 / dim as f64)
            .expect("positive scale");
        Self::state(rho).expect("uniform state")
    }

    pub fn pinching(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::InvalidArgument("pinching blocks must be nonempty and positive".into()));
        }
        let d = blocks.iter().sum();
        Self::finish(MapKind::Pinching { blocks }, d, d)
    }

    pub fn trace(c: f64, dim: usize) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidArgument("trace weight must be >= 0".into()));
        }
        Self::finish(MapKind::Trace { c }, dim, 1)
    }

    /// `T -> output · inner(input · T · input*) · output*`.
    pub fn conjugated(inner: PositiveMapSpec, input: Option<CMatrix>, output: Option<CMatrix>) -> Result<Self> {
        let in_dim = match &input {
            Some(a) if a.nrows() != inner.in_dim => {
                return Err(Error::DimensionMismatch {
                    expected: inner.in_dim,
                    found: a.nrows(),
                })
            }
            Some(a) => a.ncols(),
            None => inner.in_dim,
        };
        let out_dim = match &output {
            Some(b) if b.ncols() != inner.out_dim => {
                return Err(Error::DimensionMismatch {
                    expected: inner.out_dim,
                    found: b.ncols(),
                })
            }
            Some(b) => b.nrows(),
            None => inner.out_dim,
        };
        Self::finish(
            MapKind::Conjugated {
                inner: Box::new(inner),
                input,
                output,
            },
            in_dim,
            out_dim,
        )
    }

    pub fn direct_sum(first: PositiveMapSpec, second: PositiveMapSpec) -> Self {
        let in_dim = first.in_dim + second.in_dim;
        let out_dim = first.out_dim + second.out_dim;
        Self::finish(
            MapKind::DirectSum {
                first: Box::new(first),
                second: Box::new(second),
            },
            in_dim,
            out_dim,
        )
        .expect("direct sum of valid maps")
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.strict
    }

    /// `λmin(Φ(I))`, recorded at construction.
    pub fn strictness_margin(&self) -> f64 {
        self.unit_margin
    }

    pub fn apply(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::symmetrized(&self.apply_general(x.as_matrix())?))
    }

    /// Evaluation on an arbitrary (not necessarily Hermitian) matrix; the map
    /// is complex-linear.
    pub fn apply_general(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.in_dim || x.ncols() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: x.nrows(),
            });
        }
        Ok(match &self.kind {
            MapKind::Identity => x.clone(),
            MapKind::CongruenceSum { kraus } => {
                let mut acc = CMatrix::zeros(self.out_dim, self.out_dim);
                for k in kraus {
                    acc += k.adjoint() * x * k;
                }
                acc
            }
            MapKind::State { density } => {
                let rho = density.as_matrix();
                let mut tr = Complex64::new(0.0, 0.0);
                for i in 0..self.in_dim {
                    for j in 0..self.in_dim {
                        tr += rho[(i, j)] * x[(j, i)];
                    }
                }
                CMatrix::from_element(1, 1, tr)
            }
            MapKind::Pinching { blocks } => {
                let mut out = CMatrix::zeros(self.in_dim, self.in_dim);
                let mut start = 0;
                for &b in blocks {
                    out.view_mut((start, start), (b, b))
                        .copy_from(&x.view((start, start), (b, b)));
                    start += b;
                }
                out
            }
            MapKind::Conjugated { inner, input, output } => {
                let inner_in = match input {
                    Some(a) => a * x * a.adjoint(),
                    None => x.clone(),
                };
                let y = inner.apply_general(&inner_in)?;
                match output {
                    Some(b) => b * y * b.adjoint(),
                    None => y,
                }
            }
            MapKind::DirectSum { first, second } => {
                let m = first.in_dim;
                let n = second.in_dim;
                let off = max_abs(&x.view((0, m), (m, n)).into_owned())
                    .max(max_abs(&x.view((m, 0), (n, m)).into_owned()));
                if off > ASYM_TOL * max_abs(x) {
                    return Err(Error::NotBlockDiagonal { magnitude: off });
                }
                let a = first.apply_general(&x.view((0, 0), (m, m)).into_owned())?;
                let b = second.apply_general(&x.view((m, m), (n, n)).into_owned())?;
                block_diagonal(&a, &b)
            }
            MapKind::Trace { c } => CMatrix::from_element(1, 1, x.trace() * *c),
        })
    }

    /// Image of a positive definite matrix; requires strict positivity.
    pub fn apply_pd(&self, x: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
        if !self.strict {
            return Err(Error::NotStrictlyPositive {
                margin: self.unit_margin,
            });
        }
        PositiveDefiniteMatrix::new(self.apply(x.base())?)
    }
}

/// Applies `Φ` to a Hermitian matrix.
pub fn apply_map(phi: &PositiveMapSpec, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    phi.apply(x)
}

/// `T -> Φ(P)^{-1/2} Φ(P^{1/2} T P^{1/2}) Φ(P)^{-1/2}`, a unital positive map.
pub fn unitalize(phi: &PositiveMapSpec, anchor: &PositiveDefiniteMatrix) -> Result<PositiveMapSpec> {
    if !phi.is_strictly_positive() {
        return Err(Error::NotStrictlyPositive {
            margin: phi.strictness_margin(),
        });
    }
    if anchor.dim() != phi.in_dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.in_dim(),
            found: anchor.dim(),
        });
    }
    let image = phi.apply_pd(anchor)?;
    let unital = PositiveMapSpec::conjugated(
        phi.clone(),
        Some(anchor.sqrt().into_hermitian().into_matrix()),
        Some(image.inv_sqrt().into_hermitian().into_matrix()),
    )?;
    let unit = unital.apply(&HermitianMatrix::identity(phi.in_dim()))?;
    let defect = max_abs(&(unit.as_matrix() - CMatrix::identity(phi.out_dim(), phi.out_dim())));
    if defect > UNITAL_TOL {
        return Err(Error::SelfCheck {
            what: "unitalized map sends I to I",
            discrepancy: defect,
            tolerance: UNITAL_TOL,
        });
    }
    Ok(unital)
}

/// Square root of a positive semidefinite matrix (negative rounding noise in
/// the spectrum is clipped to zero).
pub fn psd_sqrt(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let spec = h.spectral_decompose()?;
    let values: Vec<f64> = spec.eigenvalues().iter().map(|&v| Float::sqrt(v.max(0.0))).collect();
    Ok(spec.compose_with(&values))
}

/// With `C = Φ(f1(X))^{1/2}`, the positive map `T -> C Ψ(T) C`.
pub fn two_var_freeze(
    phi: &PositiveMapSpec,
    f1_of_x: &PositiveDefiniteMatrix,
    psi: &PositiveMapSpec,
) -> Result<PositiveMapSpec> {
    if phi.out_dim() != psi.out_dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.out_dim(),
            found: psi.out_dim(),
        });
    }
    let c = psd_sqrt(&phi.apply(f1_of_x.base())?)?;
    PositiveMapSpec::conjugated(psi.clone(), None, Some(c.into_matrix()))
}

/// `X ⊕ Y -> Φ(X) ⊕ Ψ(Y)` on block-diagonal inputs.
pub fn direct_sum_map(phi: &PositiveMapSpec, psi: &PositiveMapSpec) -> PositiveMapSpec {
    PositiveMapSpec::direct_sum(phi.clone(), psi.clone())
}

/// Tracial positive functional `τ = c Tr` on a full matrix algebra.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TracialFunctional {
    c: f64,
}

impl TracialFunctional {
    pub fn new(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidArgument("tracial weight must be >= 0".into()));
        }
        Ok(Self { c })
    }

    pub fn trace() -> Self {
        Self { c: 1.0 }
    }

    pub fn weight(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, m: &CMatrix) -> Complex64 {
        m.trace() * self.c
    }

    /// Real part of `τ(m)`, for products whose trace is real in exact
    /// arithmetic.
    pub fn eval_real(&self, m: &CMatrix) -> f64 {
        self.eval(m).re
    }

    pub fn as_map(&self, dim: usize) -> PositiveMapSpec {
        PositiveMapSpec::trace(self.c, dim).expect("validated weight")
    }
}

/// Jensen inequality `f(Φu(X)) <= Φu(f(X))` for a unital `Φu` and an
/// operator convex `f` (used with `f(x) = 1/x`).
pub fn check_jensen(
    unital: &PositiveMapSpec,
    f: &ScalarFunctionSpec,
    x: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<CheckOutcome> {
    let lhs = f.apply(&unital.apply_pd(x)?)?;
    let rhs = unital.apply(&f.apply(x)?)?;
    let v = loewner_compare(&lhs, &rhs, tol)?;
    Ok(CheckOutcome::from_loewner_le("jensen", &v))
}

/// Kadison inequality `Φu(b²) >= Φu(b)²` for a unital `Φu` and Hermitian `b`.
pub fn check_kadison(unital: &PositiveMapSpec, b: &HermitianMatrix, tol: f64) -> Result<CheckOutcome> {
    let b2 = HermitianMatrix::symmetrized(&(b.as_matrix() * b.as_matrix()));
    let lhs = unital.apply(&b2)?;
    let pb = unital.apply(b)?;
    let rhs = HermitianMatrix::symmetrized(&(pb.as_matrix() * pb.as_matrix()));
    let v = loewner_compare(&lhs, &rhs, tol)?;
    Ok(CheckOutcome::from_loewner_ge("kadison", &v))
}

/// Source of a state's density matrix in a [`MapDescriptor`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateSource {
    Uniform,
    Seed(u64),
}

/// Reproducible textual description of a positive map, resolved against an
/// input dimension by [`MapDescriptor::build`].
///
/// ```text
/// identity:3   state:uniform   state:seed=5   congruence_sum:k=2;seed=9
/// congruence_sum:k=2;out=3;seed=9   pinching:2+2   trace:c=1.0
/// direct_sum(identity:2,state:seed=1)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub enum MapDescriptor {
    Identity(Option<usize>),
    State(StateSource),
    CongruenceSum {
        terms: usize,
        out: Option<usize>,
        seed: u64,
    },
    Pinching(Vec<usize>),
    Trace(f64),
    DirectSum(Box<MapDescriptor>, Box<MapDescriptor>),
}

impl MapDescriptor {
    /// Input dimension fixed by the descriptor itself, if any.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        match self {
            MapDescriptor::Identity(d) => *d,
            MapDescriptor::Pinching(blocks) => Some(blocks.iter().sum()),
            MapDescriptor::DirectSum(a, b) => Some(a.intrinsic_dim()? + b.intrinsic_dim()?),
            _ => None,
        }
    }

    /// Kind name used in reports.
    pub fn kind_name(&self) -> &'static str {
        match self {
            MapDescriptor::Identity(_) => "identity",
            MapDescriptor::State(_) => "state",
            MapDescriptor::CongruenceSum { .. } => "congruence_sum",
            MapDescriptor::Pinching(_) => "pinching",
            MapDescriptor::Trace(_) => "trace",
            MapDescriptor::DirectSum(..) => "direct_sum",
        }
    }

    /// Splits `in_dim` between the two summands of a direct sum.
    fn split(a: &MapDescriptor, b: &MapDescriptor, in_dim: usize) -> Result<(usize, usize)> {
        let mismatch = || Error::DimensionMismatch {
            expected: in_dim,
            found: a.intrinsic_dim().unwrap_or(0) + b.intrinsic_dim().unwrap_or(0),
        };
        match (a.intrinsic_dim(), b.intrinsic_dim()) {
            (Some(m), _) if m < in_dim => Ok((m, in_dim - m)),
            (None, Some(n)) if n < in_dim => Ok((in_dim - n, n)),
            (None, None) if in_dim >= 2 && in_dim.is_multiple_of(2) => Ok((in_dim / 2, in_dim / 2)),
            _ => Err(mismatch()),
        }
    }

    pub fn build(&self, in_dim: usize) -> Result<PositiveMapSpec> {
        if in_dim == 0 {
            return Err(Error::InvalidArgument("map input dimension must be at least 1".into()));
        }
        if let Some(d) = self.intrinsic_dim() {
            if d != in_dim {
                return Err(Error::DimensionMismatch {
                    expected: in_dim,
                    found: d,
                });
            }
        }
        match self {
            MapDescriptor::Identity(_) => Ok(PositiveMapSpec::identity(in_dim)),
            MapDescriptor::State(StateSource::Uniform) => Ok(PositiveMapSpec::uniform_state(in_dim)),
            MapDescriptor::State(StateSource::Seed(seed)) => {
                let rho = random_pd(in_dim, 1e2, *seed);
                let tr = rho.base().trace();
                PositiveMapSpec::state(rho.scale(1.0 / tr)?)
            }
            MapDescriptor::CongruenceSum { terms, out, seed } => {
                if *terms == 0 {
                    return Err(Error::InvalidArgument("congruence_sum needs k >= 1".into()));
                }
                let out_dim = out.unwrap_or(in_dim);
                let mut rng = rng_from_seed(*seed);
                let norm = Float::sqrt((*terms * in_dim) as f64).recip();
                let kraus = (0..*terms)
                    .map(|_| gaussian_matrix(in_dim, out_dim, &mut rng) * Complex64::new(norm, 0.0))
                    .collect();
                PositiveMapSpec::congruence_sum(kraus)
            }
            MapDescriptor::Pinching(blocks) => PositiveMapSpec::pinching(blocks.clone()),
            MapDescriptor::Trace(c) => PositiveMapSpec::trace(*c, in_dim),
            MapDescriptor::DirectSum(a, b) => {
                let (m, n) = Self::split(a, b, in_dim)?;
                Ok(PositiveMapSpec::direct_sum(a.build(m)?, b.build(n)?))
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            MapDescriptor::Identity(None) => "identity".to_string(),
            MapDescriptor::Identity(Some(d)) => format!("identity:{d}"),
            MapDescriptor::State(StateSource::Uniform) => "state:uniform".to_string(),
            MapDescriptor::State(StateSource::Seed(s)) => format!("state:seed={s}"),
            MapDescriptor::CongruenceSum { terms, out: None, seed } => {
                format!("congruence_sum:k={terms};seed={seed}")
            }
            MapDescriptor::CongruenceSum {
                terms,
                out: Some(o),
                seed,
            } => format!("congruence_sum:k={terms};out={o};seed={seed}"),
            MapDescriptor::Pinching(blocks) => format!(
                "pinching:{}",
                blocks.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("+")
            ),
            MapDescriptor::Trace(c) => format!("trace:c={c:?}"),
            MapDescriptor::DirectSum(a, b) => format!("direct_sum({},{})", a.render(), b.render()),
        }
    }
}

fn parse_int<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid {what} `{s}`")))
}

fn keyed<'a>(part: &'a str, key: &str) -> Result<&'a str> {
    part.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected `{key}=...`, found `{part}`")))
}

impl FromStr for MapDescriptor {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(body) = text.strip_prefix("direct_sum(") {
            let body = body
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse("direct_sum(...) is missing `)`".into()))?;
            let mut depth = 0usize;
            let mut split_at = None;
            for (i, ch) in body.char_indices() {
                match ch {
                    '(' => depth += 1,
                    ')' => depth = depth.saturating_sub(1),
                    ',' if depth == 0 => {
                        split_at = Some(i);
                        break;
                    }
                    _ => {}
                }
            }
            let i = split_at.ok_or_else(|| Error::Parse("direct_sum needs two maps".into()))?;
            return Ok(MapDescriptor::DirectSum(
                Box::new(body[..i].parse()?),
                Box::new(body[i + 1..].parse()?),
            ));
        }
        let (head, args) = match text.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (text, None),
        };
        let need = || args.ok_or_else(|| Error::Parse(format!("`{head}` needs arguments")));
        match head {
            "identity" => Ok(MapDescriptor::Identity(match args {
                Some(d) => Some(parse_int(d, "dimension")?),
                None => None,
            })),
            "state" => match need()? {
                "uniform" => Ok(MapDescriptor::State(StateSource::Uniform)),
                other => Ok(MapDescriptor::State(StateSource::Seed(parse_int(
                    keyed(other, "seed")?,
                    "seed",
                )?))),
            },
            "congruence_sum" => {
                let parts: Vec<&str> = need()?.split(';').collect();
                match parts.as_slice() {
                    [k, seed] => Ok(MapDescriptor::CongruenceSum {
                        terms: parse_int(keyed(k, "k")?, "k")?,
                        out: None,
                        seed: parse_int(keyed(seed, "seed")?, "seed")?,
                    }),
                    [k, out, seed] => Ok(MapDescriptor::CongruenceSum {
                        terms: parse_int(keyed(k, "k")?, "k")?,
                        out: Some(parse_int(keyed(out, "out")?, "out")?),
                        seed: parse_int(keyed(seed, "seed")?, "seed")?,
                    }),
                    _ => Err(Error::Parse("congruence_sum expects `k=..;seed=..`".into())),
                }
            }
            "pinching" => Ok(MapDescriptor::Pinching(
                need()?
                    .split('+')
                    .map(|b| parse_int(b, "block size"))
                    .collect::<Result<_>>()?,
            )),
            "trace" => {
                let c: f64 = keyed(need()?, "c")?
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse("invalid trace weight".into()))?;
                Ok(MapDescriptor::Trace(c))
            }
            other => Err(Error::Parse(format!("unknown map `{other}`"))),
        }
    }
}

impl fmt::Display for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
