//! Hermitian and positive-definite matrices, spectral decomposition and the
//! Loewner order.
//!
//! Every operator-valued quantity in the crate is a [`HermitianMatrix`]. The
//! type guarantees exact conjugate symmetry of its entries: all constructors
//! pass through the symmetrization `(M + M*) / 2`, which is idempotent in
//! floating point.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};

/// Dense complex matrix used for non-Hermitian intermediates (unitaries,
/// congruence factors, products).
pub type CMatrix = DMatrix<Complex64>;

/// Relative max-entry tolerance for `U diag(λ) U*` reconstruction and for
/// unitarity of the eigenvector basis.
pub const REL_TOL_RECONSTRUCT: f64 = 1e-12;

/// Relative asymmetry (against the max-entry magnitude) tolerated by
/// [`make_hermitian`].
pub const ASYM_TOL: f64 = 1e-10;

/// Default relative slack for Loewner comparisons.
pub const DEFAULT_LOEWNER_TOL: f64 = 1e-9;

const EIG_MAX_ITER: usize = 10_000;

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest `|m[i][j] - conj(m[j][i])|`.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows().min(m.ncols());
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// `(raw + raw*) / 2`, rejecting inputs that are not approximately Hermitian.
pub fn make_hermitian(raw: &CMatrix) -> Result<HermitianMatrix> {
    HermitianMatrix::new(raw)
}

/// A `d x d` complex matrix with exact conjugate symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl HermitianMatrix {
    /// Symmetrizes `raw` after checking that it is square, finite and within
    /// [`ASYM_TOL`] of being Hermitian.
    pub fn new(raw: &CMatrix) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::NonSquare {
                rows: raw.nrows(),
                cols: raw.ncols(),
            });
        }
        if raw.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
        }
        if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        let asym = asymmetry(raw);
        let tolerance = ASYM_TOL * max_abs(raw);
        if asym > tolerance {
            return Err(Error::ExcessAsymmetry {
                asymmetry: asym,
                tolerance,
            });
        }
        Ok(Self { m: symmetrize(raw) })
    }

    /// Builds from row-major complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NonSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::new(&CMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Builds from row-major real entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// Symmetrizes without the asymmetry gate. Used for products that are
    /// Hermitian in exact arithmetic.
    pub fn symmetrized(m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrized: non-square input");
        Self { m: symmetrize(m) }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn from_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            m: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    Complex64::new(values[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    /// Real part of the trace (the imaginary part is exactly zero).
    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.m)
    }

    /// `C H C*` for any `out x dim` matrix `C`.
    pub fn sandwich(&self, c: &CMatrix) -> Self {
        Self::symmetrized(&(c * &self.m * c.adjoint()))
    }

    /// `K* H K` for any `dim x out` matrix `K`.
    pub fn congruence(&self, k: &CMatrix) -> Self {
        Self::symmetrized(&(k.adjoint() * &self.m * k))
    }

    /// Plain matrix product; the result is generally not Hermitian.
    pub fn product(&self, other: &HermitianMatrix) -> CMatrix {
        &self.m * &other.m
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { m: &self.m * Complex64::new(c, 0.0) }
    }

    pub fn spectral_decompose(&self) -> Result<SpectralDecomposition> {
        spectral_decompose(self)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(spectral_decompose(self)?.eigenvalues)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Spectral norm `max |λ|`.
    pub fn operator_norm(&self) -> Result<f64> {
        let ev = self.eigenvalues()?;
        Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
    }

    /// Block-diagonal assembly `diag(self, other)`.
    pub fn direct_sum(&self, other: &HermitianMatrix) -> Self {
        Self {
            m: block_diagonal(&self.m, &other.m),
        }
    }
}

/// `diag(a, b)` for arbitrary rectangular blocks.
pub fn block_diagonal(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut(a.shape(), b.shape()).copy_from(b);
    out
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix { m: &self.m - &rhs.m }
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        HermitianMatrix { m: -&self.m }
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

/// `H = U diag(λ) U*` with ascending eigenvalues and unitary `U` (columns).
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// Pairs eigenvalues with the columns of `vectors` (assumed unitary) and
    /// sorts them ascending.
    pub fn from_pairs(values: Vec<f64>, vectors: CMatrix) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues = order.iter().map(|&k| values[k]).collect();
        let eigenvectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `U diag(values) U*` for the stored basis.
    pub fn compose_with(&self, values: &[f64]) -> HermitianMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        HermitianMatrix::symmetrized(&(scaled * self.eigenvectors.adjoint()))
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.compose_with(&self.eigenvalues)
    }

    /// Same basis, eigenvalues replaced by `f(λ)` and re-sorted.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SpectralDecomposition {
        let values = self.eigenvalues.iter().map(|&x| f(x)).collect();
        Self::from_pairs(values, self.eigenvectors.clone())
    }

    /// `max |U*U - I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        max_abs(&(self.eigenvectors.adjoint() * &self.eigenvectors - CMatrix::identity(n, n)))
    }
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn spectral_decompose(h: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let eig = SymmetricEigen::try_new(h.m.clone(), f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::EigensolverFailure)?;
    Ok(SpectralDecomposition::from_pairs(
        eig.eigenvalues.iter().copied().collect(),
        eig.eigenvectors,
    ))
}

/// Hermitian matrix with strictly positive spectrum. The spectral
/// decomposition used to validate it is kept for functional calculus.
#[derive(Clone, Debug)]
pub struct PositiveDefiniteMatrix {
    base: HermitianMatrix,
    spectrum: SpectralDecomposition,
}

impl PartialEq for PositiveDefiniteMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
    }
}

impl PositiveDefiniteMatrix {
    pub fn new(base: HermitianMatrix) -> Result<Self> {
        let spectrum = spectral_decompose(&base)?;
        if !(spectrum.min() > 0.0) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: spectrum.min(),
            });
        }
        Ok(Self { base, spectrum })
    }

    /// Builds `U diag(λ) U*` from a known positive spectrum without
    /// re-running the eigensolver.
    pub fn from_spectrum(spectrum: SpectralDecomposition) -> Result<Self> {
        if !(spectrum.min() > 0.0) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: spectrum.min(),
            });
        }
        Ok(Self {
            base: spectrum.reconstruct(),
            spectrum,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_spectrum(SpectralDecomposition {
            eigenvalues: alloc::vec![1.0; dim],
            eigenvectors: CMatrix::identity(dim, dim),
        })
        .expect("identity is positive definite")
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_diagonal(values))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_rows(rows)?)
    }

    pub fn base(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn as_matrix(&self) -> &CMatrix {
        self.base.as_matrix()
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.base
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectrum.min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.spectrum.max()
    }

    pub fn operator_norm(&self) -> f64 {
        self.spectrum.max()
    }

    pub fn condition_number(&self) -> f64 {
        self.spectrum.max() / self.spectrum.min()
    }

    /// Functional calculus with a map that keeps the spectrum positive.
    pub fn map_positive(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_spectrum(self.spectrum.map(f))
    }

    pub fn sqrt(&self) -> Self {
        self.map_positive(Float::sqrt).expect("sqrt keeps positivity")
    }

    pub fn inverse(&self) -> Self {
        self.map_positive(Float::recip).expect("inverse keeps positivity")
    }

    pub fn inv_sqrt(&self) -> Self {
        self.map_positive(|x| Float::sqrt(x).recip())
            .expect("inverse square root keeps positivity")
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        self.map_positive(|x| c * x)
    }

    /// `C X C*` re-validated as positive definite.
    pub fn sandwich(&self, c: &CMatrix) -> Result<Self> {
        Self::new(self.base.sandwich(c))
    }

    pub fn direct_sum(&self, other: &PositiveDefiniteMatrix) -> Self {
        let n = self.dim();
        let m = other.dim();
        let mut values = self.spectrum.eigenvalues.clone();
        values.extend_from_slice(&other.spectrum.eigenvalues);
        let vectors = block_diagonal(&self.spectrum.eigenvectors, &other.spectrum.eigenvectors);
        debug_assert_eq!(vectors.nrows(), n + m);
        Self::from_spectrum(SpectralDecomposition::from_pairs(values, vectors))
            .expect("direct sum of positive definite blocks")
    }
}

/// Outcome of comparing two Hermitian matrices in the Loewner order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Relation {
    LessEqual,
    GreaterEqual,
    Equal,
    Incomparable,
}

/// Relation between `A` and `B`, with signed eigenvalue margins.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoewnerVerdict {
    pub relation: Relation,
    /// Margin of the direction that holds (the least violated one when the
    /// pair is incomparable).
    pub margin: f64,
    /// `λmin(B - A)`: the margin of the claim `A <= B`.
    pub le_margin: f64,
    /// `λmin(A - B)`: the margin of the claim `A >= B`.
    pub ge_margin: f64,
    pub tolerance: f64,
    /// `max(‖A‖, ‖B‖)` in operator norm.
    pub scale: f64,
}

impl LoewnerVerdict {
    pub fn slack(&self) -> f64 {
        self.tolerance * self.scale
    }

    pub fn holds_le(&self) -> bool {
        matches!(self.relation, Relation::LessEqual | Relation::Equal)
    }

    pub fn holds_ge(&self) -> bool {
        matches!(self.relation, Relation::GreaterEqual | Relation::Equal)
    }
}

/// Compares `a` and `b` with relative slack `tol * max(‖a‖, ‖b‖)`.
pub fn loewner_compare(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    tol: f64,
) -> Result<LoewnerVerdict> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let diff = (b - a).eigenvalues()?;
    let le_margin = diff[0];
    let ge_margin = -diff[diff.len() - 1];
    let scale = a.operator_norm()?.max(b.operator_norm()?);
    let slack = tol * scale;
    let le = le_margin >= -slack;
    let ge = ge_margin >= -slack;
    let (relation, margin) = match (le, ge) {
        (true, true) => (Relation::Equal, le_margin.max(ge_margin)),
        (true, false) => (Relation::LessEqual, le_margin),
        (false, true) => (Relation::GreaterEqual, ge_margin),
        (false, false) => (Relation::Incomparable, le_margin.max(ge_margin)),
    };
    Ok(LoewnerVerdict {
        relation,
        margin,
        le_margin,
        ge_margin,
        tolerance: tol,
        scale,
    })
}
