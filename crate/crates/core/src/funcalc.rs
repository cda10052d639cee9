//! Scalar functions on `(0, inf)` with declared operator-monotonicity
//! classes, matrix functional calculus, and resolvent derivatives.
//!
//! Functions have a canonical textual form used by the CLI and reports:
//!
//! ```text
//! power:0.5   log   neg_inverse   resolvent:2.0   neg_resolvent:1.0
//! mon_mixture:a=0.0;b=1.0;w=2.0,l=3.0|w=0.5,l=0.1
//! dec_mixture:g=1.0;w=2.0,l=3.0|w=0.5,l=0.1
//! ```
//!
//! A suffix `@om`, `@omd` or `@none` records a declared class that differs
//! from the form's natural one (e.g. `power:3.0` is unclassified by default,
//! `power:0.5@none` is a square root used as a negative control).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::{loewner_compare, HermitianMatrix, PositiveDefiniteMatrix};
use crate::outcome::CheckOutcome;
use crate::random::{derive_seed, random_pd_in, random_psd, rng_from_seed};

/// One term `w / (l + x)` (decreasing) or `w x / (l + x)` (monotone).
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MixtureTerm {
    pub weight: f64,
    pub shift: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FunctionForm {
    /// `x^p`
    Power(f64),
    Log,
    /// `-1/x`
    NegInverse,
    /// `1/(l + x)`
    Resolvent(f64),
    /// `-1/(l + x)`
    NegResolvent(f64),
    /// `alpha + beta x + sum w x/(l + x)`
    MonotoneMixture {
        alpha: f64,
        beta: f64,
        terms: Vec<MixtureTerm>,
    },
    /// `gamma + sum w/(l + x)`
    DecreasingMixture { gamma: f64, terms: Vec<MixtureTerm> },
}

/// Declared operator-monotonicity class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FunctionClass {
    /// Operator monotone on `(0, inf)`.
    Om,
    /// Operator monotone decreasing with range in `(0, inf)`.
    OmdPos,
    /// No claim; negative controls only.
    Unclassified,
}

impl FunctionClass {
    fn tag(self) -> &'static str {
        match self {
            FunctionClass::Om => "om",
            FunctionClass::OmdPos => "omd",
            FunctionClass::Unclassified => "none",
        }
    }
}

impl FunctionForm {
    /// Class a form carries when none is stated.
    pub fn natural_class(&self) -> FunctionClass {
        match self {
            FunctionForm::Power(p) if (0.0..=1.0).contains(p) => FunctionClass::Om,
            FunctionForm::Power(p) if (-1.0..0.0).contains(p) => FunctionClass::OmdPos,
            FunctionForm::Power(_) => FunctionClass::Unclassified,
            FunctionForm::Log
            | FunctionForm::NegInverse
            | FunctionForm::NegResolvent(_)
            | FunctionForm::MonotoneMixture { .. } => FunctionClass::Om,
            FunctionForm::Resolvent(_) | FunctionForm::DecreasingMixture { .. } => FunctionClass::OmdPos,
        }
    }

    fn admits(&self, class: FunctionClass) -> bool {
        if class == FunctionClass::Unclassified || class == self.natural_class() {
            return true;
        }
        // x^0 = 1 is both monotone and decreasing-positive.
        matches!(self, FunctionForm::Power(p) if *p == 0.0)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidFunction(msg.to_string()));
        let terms_ok = |terms: &[MixtureTerm]| {
            terms.iter().all(|t| {
                t.weight.is_finite() && t.weight > 0.0 && t.shift.is_finite() && t.shift >= 0.0
            })
        };
        match self {
            FunctionForm::Power(p) if !p.is_finite() => bad("power exponent must be finite"),
            FunctionForm::Resolvent(l) | FunctionForm::NegResolvent(l) if !(l.is_finite() && *l >= 0.0) => {
                bad("resolvent shift must be finite and >= 0")
            }
            FunctionForm::MonotoneMixture { alpha, beta, terms } => {
                if !alpha.is_finite() || !(beta.is_finite() && *beta >= 0.0) {
                    bad("monotone mixture needs finite alpha and beta >= 0")
                } else if !terms_ok(terms) {
                    bad("mixture terms need weight > 0 and shift >= 0")
                } else {
                    Ok(())
                }
            }
            FunctionForm::DecreasingMixture { gamma, terms } => {
                if !(gamma.is_finite() && *gamma >= 0.0) {
                    bad("decreasing mixture needs gamma >= 0")
                } else if !terms_ok(terms) {
                    bad("mixture terms need weight > 0 and shift >= 0")
                } else if *gamma == 0.0 && terms.is_empty() {
                    bad("decreasing mixture must be strictly positive")
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        match self {
            FunctionForm::Power(p) => Float::powf(x, *p),
            FunctionForm::Log => Float::ln(x),
            FunctionForm::NegInverse => -x.recip(),
            FunctionForm::Resolvent(l) => (l + x).recip(),
            FunctionForm::NegResolvent(l) => -(l + x).recip(),
            FunctionForm::MonotoneMixture { alpha, beta, terms } => {
                alpha + beta * x + terms.iter().map(|t| t.weight * x / (t.shift + x)).sum::<f64>()
            }
            FunctionForm::DecreasingMixture { gamma, terms } => {
                gamma + terms.iter().map(|t| t.weight / (t.shift + x)).sum::<f64>()
            }
        }
    }
}

/// A scalar function together with its declared class.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalarFunctionSpec {
    form: FunctionForm,
    class: FunctionClass,
}

impl ScalarFunctionSpec {
    /// Rejects invalid parameters and (form, class) pairs the form cannot
    /// carry.
    pub fn new(form: FunctionForm, class: FunctionClass) -> Result<Self> {
        form.validate()?;
        if !form.admits(class) {
            return Err(Error::InvalidFunction(format!(
                "{} cannot declare class {}",
                render_form(&form),
                class.tag()
            )));
        }
        Ok(Self { form, class })
    }

    pub fn with_natural_class(form: FunctionForm) -> Result<Self> {
        let class = form.natural_class();
        Self::new(form, class)
    }

    pub fn unclassified(form: FunctionForm) -> Result<Self> {
        Self::new(form, FunctionClass::Unclassified)
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::with_natural_class(FunctionForm::Power(p))
    }

    pub fn log() -> Self {
        Self::with_natural_class(FunctionForm::Log).expect("log is valid")
    }

    pub fn neg_inverse() -> Self {
        Self::with_natural_class(FunctionForm::NegInverse).expect("neg_inverse is valid")
    }

    pub fn resolvent(shift: f64) -> Result<Self> {
        Self::with_natural_class(FunctionForm::Resolvent(shift))
    }

    pub fn neg_resolvent(shift: f64) -> Result<Self> {
        Self::with_natural_class(FunctionForm::NegResolvent(shift))
    }

    pub fn monotone_mixture(alpha: f64, beta: f64, terms: Vec<MixtureTerm>) -> Result<Self> {
        Self::with_natural_class(FunctionForm::MonotoneMixture { alpha, beta, terms })
    }

    pub fn decreasing_mixture(gamma: f64, terms: Vec<MixtureTerm>) -> Result<Self> {
        Self::with_natural_class(FunctionForm::DecreasingMixture { gamma, terms })
    }

    pub fn form(&self) -> &FunctionForm {
        &self.form
    }

    pub fn class(&self) -> FunctionClass {
        self.class
    }

    /// Shift `l` when the function is `1/(l + x)` (including `x^-1`).
    pub fn resolvent_shift(&self) -> Option<f64> {
        match self.form {
            FunctionForm::Resolvent(l) => Some(l),
            FunctionForm::Power(-1.0) => Some(0.0),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        eval_scalar(self, x)
    }

    pub fn apply(&self, x: &PositiveDefiniteMatrix) -> Result<HermitianMatrix> {
        apply(self, x)
    }

    /// Functional calculus when the result is known to stay positive
    /// definite (e.g. decreasing-positive functions).
    pub fn apply_positive(&self, x: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
        x.map_positive(|v| self.form.eval_unchecked(v))
    }

    pub fn render(&self) -> String {
        let mut s = render_form(&self.form);
        if self.class != self.form.natural_class() {
            s.push('@');
            s.push_str(self.class.tag());
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        text.parse()
    }
}

/// Evaluates `f` at `x > 0`.
pub fn eval_scalar(f: &ScalarFunctionSpec, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainViolation { x });
    }
    Ok(f.form.eval_unchecked(x))
}

/// `U diag(f(λ)) U*` for `X = U diag(λ) U*`.
pub fn apply(f: &ScalarFunctionSpec, x: &PositiveDefiniteMatrix) -> Result<HermitianMatrix> {
    let spec = x.spectrum();
    let values: Vec<f64> = spec
        .eigenvalues()
        .iter()
        .map(|&v| eval_scalar(f, v))
        .collect::<Result<_>>()?;
    Ok(spec.compose_with(&values))
}

fn resolvent_of(shift: f64, x: &PositiveDefiniteMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
    if !(shift.is_finite() && shift >= 0.0) {
        return Err(Error::InvalidArgument("resolvent shift must be >= 0".into()));
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    let spec = x.spectrum();
    let values: Vec<f64> = spec.eigenvalues().iter().map(|&v| (shift + v).recip()).collect();
    Ok(spec.compose_with(&values))
}

/// `d/dt (l + X + tY)^{-1} |_{t=0} = -R Y R` with `R = (l + X)^{-1}`.
pub fn resolvent_first_derivative(
    shift: f64,
    x: &PositiveDefiniteMatrix,
    y: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    let r = resolvent_of(shift, x, y)?;
    let ryr = r.as_matrix() * y.as_matrix() * r.as_matrix();
    Ok(HermitianMatrix::symmetrized(&-ryr))
}

/// `d²/dt² (l + X + tY)^{-1} |_{t=0} = 2 R Y R Y R`.
pub fn resolvent_second_derivative(
    shift: f64,
    x: &PositiveDefiniteMatrix,
    y: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    let r = resolvent_of(shift, x, y)?;
    let ry = r.as_matrix() * y.as_matrix();
    let m = &ry * &ry * r.as_matrix() * num_complex::Complex64::new(2.0, 0.0);
    Ok(HermitianMatrix::symmetrized(&m))
}

/// One monotonicity probe: compares `f(X)` and `f(X + P)` for `P >= 0`.
/// `increasing` selects the claimed direction.
pub fn monotonicity_probe(
    f: &ScalarFunctionSpec,
    x: &PositiveDefiniteMatrix,
    p: &HermitianMatrix,
    increasing: bool,
    tol: f64,
) -> Result<CheckOutcome> {
    let shifted = PositiveDefiniteMatrix::new(x.base() + p)?;
    let fx = apply(f, x)?;
    let fy = apply(f, &shifted)?;
    let v = loewner_compare(&fx, &fy, tol)?;
    Ok(if increasing {
        CheckOutcome::from_loewner_le("monotonicity", &v)
    } else {
        CheckOutcome::from_loewner_ge("monotonicity", &v)
    })
}

/// Randomized monotonicity check of a classified function: `X <= X + P`
/// must give `f(X) <= f(X + P)` (OM) or `f(X) >= f(X + P)` (OMDPos).
pub fn check_monotonicity_sample(
    f: &ScalarFunctionSpec,
    dim: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<CheckOutcome>> {
    let increasing = match f.class() {
        FunctionClass::Om => true,
        FunctionClass::OmdPos => false,
        FunctionClass::Unclassified => {
            return Err(Error::ClassViolation(format!(
                "{} has no declared monotonicity class",
                f.render()
            )))
        }
    };
    (0..trials)
        .map(|i| {
            let trial_seed = derive_seed(seed, "monotonicity", i as u64);
            let mut rng = rng_from_seed(trial_seed);
            let x = random_pd_in(dim, 1e-2, 1e2, &mut rng);
            let size = x.operator_norm() * rng.random_range(0.01..1.0);
            let p = random_psd(dim, size, &mut rng);
            monotonicity_probe(f, &x, &p, increasing, tol).map(|o| o.with_seed(trial_seed))
        })
        .collect()
}

fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

fn render_terms(terms: &[MixtureTerm]) -> String {
    terms
        .iter()
        .map(|t| format!("w={},l={}", fmt_num(t.weight), fmt_num(t.shift)))
        .collect::<Vec<_>>()
        .join("|")
}

fn render_form(form: &FunctionForm) -> String {
    match form {
        FunctionForm::Power(p) => format!("power:{}", fmt_num(*p)),
        FunctionForm::Log => "log".to_string(),
        FunctionForm::NegInverse => "neg_inverse".to_string(),
        FunctionForm::Resolvent(l) => format!("resolvent:{}", fmt_num(*l)),
        FunctionForm::NegResolvent(l) => format!("neg_resolvent:{}", fmt_num(*l)),
        FunctionForm::MonotoneMixture { alpha, beta, terms } => {
            let mut s = format!("mon_mixture:a={};b={}", fmt_num(*alpha), fmt_num(*beta));
            if !terms.is_empty() {
                s.push(';');
                s.push_str(&render_terms(terms));
            }
            s
        }
        FunctionForm::DecreasingMixture { gamma, terms } => {
            let mut s = format!("dec_mixture:g={}", fmt_num(*gamma));
            if !terms.is_empty() {
                s.push(';');
                s.push_str(&render_terms(terms));
            }
            s
        }
    }
}

fn parse_num(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid number `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite number `{s}`")));
    }
    Ok(v)
}

fn parse_keyed(part: &str, key: &str) -> Result<f64> {
    let value = part
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected `{key}=...`, found `{part}`")))?;
    parse_num(value)
}

fn parse_terms(text: &str) -> Result<Vec<MixtureTerm>> {
    text.split('|')
        .map(|term| {
            let (w, l) = term
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("mixture term `{term}` needs `w=..,l=..`")))?;
            Ok(MixtureTerm {
                weight: parse_keyed(w, "w")?,
                shift: parse_keyed(l, "l")?,
            })
        })
        .collect()
}

fn parse_form<'a>(text: &'a str) -> Result<FunctionForm> {
    let (head, args) = match text.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (text, None),
    };
    let need = |args: Option<&'a str>| args.ok_or_else(|| Error::Parse(format!("`{head}` needs an argument")));
    let form = match head {
        "power" => FunctionForm::Power(parse_num(need(args)?)?),
        "log" | "neg_inverse" if args.is_some() => {
            return Err(Error::Parse(format!("`{head}` takes no argument")))
        }
        "log" => FunctionForm::Log,
        "neg_inverse" => FunctionForm::NegInverse,
        "resolvent" => FunctionForm::Resolvent(parse_num(need(args)?)?),
        "neg_resolvent" => FunctionForm::NegResolvent(parse_num(need(args)?)?),
        "mon_mixture" => {
            let mut parts = need(args)?.splitn(3, ';');
            let alpha = parse_keyed(parts.next().unwrap_or(""), "a")?;
            let beta = parse_keyed(
                parts.next().ok_or_else(|| Error::Parse("mon_mixture needs `b=`".into()))?,
                "b",
            )?;
            let terms = match parts.next() {
                Some(t) => parse_terms(t)?,
                None => Vec::new(),
            };
            FunctionForm::MonotoneMixture { alpha, beta, terms }
        }
        "dec_mixture" => {
            let mut parts = need(args)?.splitn(2, ';');
            let gamma = parse_keyed(parts.next().unwrap_or(""), "g")?;
            let terms = match parts.next() {
                Some(t) => parse_terms(t)?,
                None => Vec::new(),
            };
            FunctionForm::DecreasingMixture { gamma, terms }
        }
        other => return Err(Error::Parse(format!("unknown function `{other}`"))),
    };
    Ok(form)
}

impl FromStr for ScalarFunctionSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (body, class) = match text.rsplit_once('@') {
            Some((body, tag)) => {
                let class = match tag {
                    "om" => FunctionClass::Om,
                    "omd" => FunctionClass::OmdPos,
                    "none" => FunctionClass::Unclassified,
                    other => return Err(Error::Parse(format!("unknown class tag `{other}`"))),
                };
                (body, Some(class))
            }
            None => (text, None),
        };
        let form = parse_form(body)?;
        match class {
            Some(c) => Self::new(form, c),
            None => Self::with_natural_class(form),
        }
    }
}

impl fmt::Display for ScalarFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
