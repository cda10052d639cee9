//! Families of functions and maps sampled by the campaign.

use rand::Rng;
use serde::{Deserialize, Serialize};

use opconv_core::funcalc::{MixtureTerm, ScalarFunctionSpec};
use opconv_core::posmaps::{MapDescriptor, PositiveMapSpec, StateSource};
use opconv_core::random::InstanceRng;
use opconv_core::{Error, HermitianMatrix, Result};

/// Congruence sums are redrawn until `map(I)` has condition number at most
/// [`MAX_MAP_CONDITION`], at most this often.
const MAP_RETRIES: usize = 64;
/// Same budget as the `[1e-2, 1e2]` input spectra: keeps `map(f(X))`
/// invertible to working precision for `g = -1/x`.
pub const MAX_MAP_CONDITION: f64 = 1e3;

fn map_condition(phi: &PositiveMapSpec) -> Result<f64> {
    let ev = phi.apply(&HermitianMatrix::identity(phi.in_dim()))?.eigenvalues()?;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    Ok(if lo > 0.0 { hi / lo } else { f64::INFINITY })
}

fn mixture_terms(rng: &mut InstanceRng, max_terms: usize) -> Vec<MixtureTerm> {
    let n = rng.random_range(1..=max_terms);
    (0..n)
        .map(|_| MixtureTerm {
            weight: rng.random_range(0.1..2.0),
            shift: rng.random_range(0.0..2.0),
        })
        .collect()
}

/// Operator monotone decreasing, positive functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FFamily {
    Resolvent,
    NegPower,
    DecMixture,
}

impl FFamily {
    pub const ALL: [FFamily; 3] = [FFamily::Resolvent, FFamily::NegPower, FFamily::DecMixture];

    pub fn name(self) -> &'static str {
        match self {
            FFamily::Resolvent => "resolvent",
            FFamily::NegPower => "neg_power",
            FFamily::DecMixture => "dec_mixture",
        }
    }

    pub fn sample(self, rng: &mut InstanceRng) -> Result<ScalarFunctionSpec> {
        match self {
            FFamily::Resolvent => ScalarFunctionSpec::resolvent(rng.random_range(0.0..=2.0)),
            FFamily::NegPower => ScalarFunctionSpec::power(-rng.random_range(0.05..=1.0)),
            FFamily::DecMixture => {
                let gamma = rng.random_range(0.0..1.0);
                ScalarFunctionSpec::decreasing_mixture(gamma, mixture_terms(rng, 3))
            }
        }
    }
}

/// Operator monotone functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GFamily {
    Log,
    Power,
    NegInverse,
    NegResolvent,
    MonotoneMixture,
}

impl GFamily {
    pub const ALL: [GFamily; 5] = [
        GFamily::Log,
        GFamily::Power,
        GFamily::NegInverse,
        GFamily::NegResolvent,
        GFamily::MonotoneMixture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GFamily::Log => "log",
            GFamily::Power => "power",
            GFamily::NegInverse => "neg_inverse",
            GFamily::NegResolvent => "neg_resolvent",
            GFamily::MonotoneMixture => "monotone_mixture",
        }
    }

    pub fn sample(self, rng: &mut InstanceRng) -> Result<ScalarFunctionSpec> {
        match self {
            GFamily::Log => Ok(ScalarFunctionSpec::log()),
            GFamily::Power => ScalarFunctionSpec::power(rng.random_range(0.0..=1.0)),
            GFamily::NegInverse => Ok(ScalarFunctionSpec::neg_inverse()),
            GFamily::NegResolvent => ScalarFunctionSpec::neg_resolvent(rng.random_range(0.0..=2.0)),
            GFamily::MonotoneMixture => {
                let alpha = rng.random_range(-1.0..1.0);
                let beta = rng.random_range(0.0..1.0);
                ScalarFunctionSpec::monotone_mixture(alpha, beta, mixture_terms(rng, 2))
            }
        }
    }
}

/// Strictly positive maps from `d x d` inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapFamily {
    Identity,
    State,
    CongruenceSum,
    Pinching,
}

impl MapFamily {
    pub const ALL: [MapFamily; 4] = [
        MapFamily::Identity,
        MapFamily::State,
        MapFamily::CongruenceSum,
        MapFamily::Pinching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapFamily::Identity => "identity",
            MapFamily::State => "state",
            MapFamily::CongruenceSum => "congruence_sum",
            MapFamily::Pinching => "pinching",
        }
    }

    /// Whether maps of this family send `d x d` inputs to `d x d` outputs.
    pub fn preserves_dim(self) -> bool {
        self != MapFamily::State
    }

    /// A strictly positive map on `dim x dim` inputs with its descriptor.
    pub fn sample(self, dim: usize, rng: &mut InstanceRng) -> Result<(MapDescriptor, PositiveMapSpec)> {
        let desc = match self {
            MapFamily::Identity => MapDescriptor::Identity(Some(dim)),
            MapFamily::State => MapDescriptor::State(StateSource::Seed(rng.random())),
            MapFamily::Pinching => {
                let mut blocks = Vec::new();
                let mut left = dim;
                while left > 0 {
                    let b = rng.random_range(1..=left);
                    blocks.push(b);
                    left -= b;
                }
                MapDescriptor::Pinching(blocks)
            }
            MapFamily::CongruenceSum => {
                let terms = rng.random_range(1..=3);
                for _ in 0..MAP_RETRIES {
                    let desc = MapDescriptor::CongruenceSum {
                        terms,
                        out: None,
                        seed: rng.random(),
                    };
                    let phi = desc.build(dim)?;
                    if phi.is_strictly_positive() && map_condition(&phi)? <= MAX_MAP_CONDITION {
                        return Ok((desc, phi));
                    }
                }
                return Err(Error::InvalidArgument(format!(
                    "no congruence sum with condition <= {MAX_MAP_CONDITION:e} in {MAP_RETRIES} draws"
                )));
            }
        };
        let phi = desc.build(dim)?;
        Ok((desc, phi))
    }
}
