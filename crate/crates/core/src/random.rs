//! Seeded generation of test instances.
//!
//! All generators are deterministic functions of their seed. Campaign
//! trials derive their seed from `(master seed, check id, trial index)` with
//! [`derive_seed`], so trials can run in any order.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::matrix::{CMatrix, HermitianMatrix, PositiveDefiniteMatrix, SpectralDecomposition};

pub type InstanceRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> InstanceRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable per-trial seed: FNV-1a over the label, mixed with the master seed
/// and trial index.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(splitmix64(master ^ h).wrapping_add(index))
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phase of
/// `R`'s diagonal moved into `Q`).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    if dim == 1 {
        return CMatrix::identity(1, 1);
    }
    let qr = gaussian_matrix(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

fn log_uniform<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    if lo == hi {
        return lo;
    }
    let u: f64 = rng.random();
    Float::exp(Float::ln(lo) + u * (Float::ln(hi) - Float::ln(lo)))
}

/// Positive definite matrix with eigenvalues log-uniform in `[lo, hi]`,
/// conjugated by a Haar unitary.
pub fn random_pd_in<R: Rng + ?Sized>(dim: usize, lo: f64, hi: f64, rng: &mut R) -> PositiveDefiniteMatrix {
    assert!(dim >= 1 && lo > 0.0 && hi >= lo, "random_pd_in: invalid arguments");
    let mut values: Vec<f64> = (0..dim).map(|_| log_uniform(lo, hi, rng)).collect();
    values.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
    let u = random_unitary(dim, rng);
    PositiveDefiniteMatrix::from_spectrum(SpectralDecomposition::from_pairs(values, u))
        .expect("log-uniform spectrum is positive")
}

/// `dim x dim` positive definite matrix with condition number at most
/// `cond_max`, spectrum log-uniform in `[cond_max^{-1/2}, cond_max^{1/2}]`.
pub fn random_pd(dim: usize, cond_max: f64, seed: u64) -> PositiveDefiniteMatrix {
    assert!(cond_max >= 1.0, "cond_max must be at least 1");
    let half = Float::sqrt(cond_max);
    random_pd_in(dim, 1.0 / half, half, &mut rng_from_seed(seed))
}

/// Hermitian matrix with eigenvalues uniform in `[-norm_bound, norm_bound]`.
pub fn random_hermitian_with<R: Rng + ?Sized>(dim: usize, norm_bound: f64, rng: &mut R) -> HermitianMatrix {
    assert!(norm_bound > 0.0, "norm_bound must be positive");
    // Keeps the conjugated spectrum inside the bound after rounding.
    let guard = 1.0 - 16.0 * dim as f64 * f64::EPSILON;
    let values: Vec<f64> = (0..dim)
        .map(|_| norm_bound * guard * rng.random_range(-1.0..=1.0))
        .collect();
    let u = random_unitary(dim, rng);
    let mut scaled = u.clone();
    for (j, &v) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(v);
    }
    HermitianMatrix::symmetrized(&(scaled * u.adjoint()))
}

pub fn random_hermitian(dim: usize, norm_bound: f64, seed: u64) -> HermitianMatrix {
    random_hermitian_with(dim, norm_bound, &mut rng_from_seed(seed))
}

/// Positive semidefinite `G G*` of random rank in `1..=dim`, scaled to
/// operator-norm order `scale`.
pub fn random_psd<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> HermitianMatrix {
    let rank = rng.random_range(1..=dim);
    let g = gaussian_matrix(dim, rank, rng);
    let h = HermitianMatrix::symmetrized(&(&g * g.adjoint()));
    let norm = h.max_abs().max(f64::MIN_POSITIVE);
    h.scale(scale / norm)
}

/// Invertible `dim x dim` matrix `U diag(s) V*` with singular values in
/// `[s_min, s_max]`.
pub fn random_invertible<R: Rng + ?Sized>(dim: usize, s_min: f64, s_max: f64, rng: &mut R) -> CMatrix {
    let u = random_unitary(dim, rng);
    let v = random_unitary(dim, rng);
    let mut scaled = u;
    for j in 0..dim {
        let s = rng.random_range(s_min..=s_max);
        scaled.column_mut(j).scale_mut(s);
    }
    scaled * v.adjoint()
}
