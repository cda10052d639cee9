//! Arithmetic, harmonic and geometric means of positive definite matrices.
//!
//! The harmonic mean is computed twice, from the inverse formula
//! `((X^-1 + Y^-1)/2)^-1` and from the parallel-sum identity
//! `2(X - X(X+Y)^-1 X)`, and the two are required to agree. The geometric mean
//! is computed in both argument orders and required to be symmetric.

use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{
    block_diagonal, loewner_compare, max_abs, CMatrix, HermitianMatrix, LoewnerVerdict,
    PositiveDefiniteMatrix,
};

/// Relative agreement required between the two harmonic-mean formulas,
/// measured against the larger input.
pub const HARMONIC_SELF_CHECK_TOL: f64 = 1e-10;

/// Relative agreement required between `X#Y` and `Y#X`.
pub const GEOMETRIC_SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MeanKind {
    Arithmetic,
    Harmonic,
    Geometric,
}

impl MeanKind {
    pub const ALL: [MeanKind; 3] = [MeanKind::Arithmetic, MeanKind::Harmonic, MeanKind::Geometric];

    pub fn name(self) -> &'static str {
        match self {
            MeanKind::Arithmetic => "arithmetic",
            MeanKind::Harmonic => "harmonic",
            MeanKind::Geometric => "geometric",
        }
    }

    pub fn apply(self, x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
        match self {
            MeanKind::Arithmetic => arithmetic_mean(x, y),
            MeanKind::Harmonic => harmonic_mean(x, y),
            MeanKind::Geometric => geometric_mean(x, y),
        }
    }
}

impl FromStr for MeanKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "arithmetic" => Ok(MeanKind::Arithmetic),
            "harmonic" => Ok(MeanKind::Harmonic),
            "geometric" => Ok(MeanKind::Geometric),
            other => Err(Error::UnknownMean(other.to_string())),
        }
    }
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn same_dim(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

/// `(X + Y) / 2`.
pub fn arithmetic_mean(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
    same_dim(x, y)?;
    PositiveDefiniteMatrix::new((x.base() + y.base()).scale(0.5))
}

/// `2(X - X(X+Y)^-1 X)`.
pub fn parallel_sum_form(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<HermitianMatrix> {
    same_dim(x, y)?;
    let sum_inv = PositiveDefiniteMatrix::new(x.base() + y.base())?.inverse();
    let xsx = HermitianMatrix::symmetrized(&(x.as_matrix() * sum_inv.as_matrix() * x.as_matrix()));
    Ok((x.base() - &xsx).scale(2.0))
}

/// Harmonic mean and the measured discrepancy between its two formulas.
/// Fails with [`Error::SelfCheck`] when the discrepancy exceeds `self_check_tol`.
pub fn harmonic_mean_checked(
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    self_check_tol: f64,
) -> Result<(PositiveDefiniteMatrix, f64)> {
    same_dim(x, y)?;
    let avg_inv = PositiveDefiniteMatrix::new((x.inverse().base() + y.inverse().base()).scale(0.5))?;
    let mean = avg_inv.inverse();
    let other = parallel_sum_form(x, y)?;
    let reference = x.base().max_abs().max(y.base().max_abs());
    let discrepancy = max_abs(&(mean.as_matrix() - other.as_matrix())) / reference;
    if !(discrepancy <= self_check_tol) {
        return Err(Error::SelfCheck {
            what: "harmonic mean: inverse formula vs parallel sum",
            discrepancy,
            tolerance: self_check_tol,
        });
    }
    Ok((mean, discrepancy))
}

/// `((X^-1 + Y^-1)/2)^-1`.
pub fn harmonic_mean(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
    harmonic_mean_checked(x, y, HARMONIC_SELF_CHECK_TOL).map(|(m, _)| m)
}

fn geometric_one_sided(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
    let inner = y.sandwich(x.inv_sqrt().as_matrix())?;
    inner.sqrt().sandwich(x.sqrt().as_matrix())
}

/// Geometric mean plus the relative asymmetry `‖X#Y - Y#X‖ / ‖X#Y‖`.
pub fn geometric_mean_checked(
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    symmetry_tol: f64,
) -> Result<(PositiveDefiniteMatrix, f64)> {
    same_dim(x, y)?;
    let xy = geometric_one_sided(x, y)?;
    let yx = geometric_one_sided(y, x)?;
    let discrepancy = max_abs(&(xy.as_matrix() - yx.as_matrix())) / xy.base().max_abs();
    if !(discrepancy <= symmetry_tol) {
        return Err(Error::SelfCheck {
            what: "geometric mean symmetry",
            discrepancy,
            tolerance: symmetry_tol,
        });
    }
    Ok((xy, discrepancy))
}

/// `X^{1/2} (X^{-1/2} Y X^{-1/2})^{1/2} X^{1/2}`.
pub fn geometric_mean(x: &PositiveDefiniteMatrix, y: &PositiveDefiniteMatrix) -> Result<PositiveDefiniteMatrix> {
    geometric_mean_checked(x, y, GEOMETRIC_SYMMETRY_TOL).map(|(m, _)| m)
}

/// `[[X, Z], [Z, Y]]`.
pub fn block_matrix(x: &HermitianMatrix, z: &HermitianMatrix, y: &HermitianMatrix) -> Result<HermitianMatrix> {
    if x.dim() != y.dim() || x.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: if x.dim() != y.dim() { y.dim() } else { z.dim() },
        });
    }
    let d = x.dim();
    let mut m: CMatrix = block_diagonal(x.as_matrix(), y.as_matrix());
    m.view_mut((0, d), (d, d)).copy_from(z.as_matrix());
    m.view_mut((d, 0), (d, d)).copy_from(z.as_matrix());
    Ok(HermitianMatrix::symmetrized(&m))
}

/// Compares the block matrix `[[X, Z], [Z, Y]]` against zero.
pub fn geometric_block_verdict(
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    z: &HermitianMatrix,
    tol: f64,
) -> Result<LoewnerVerdict> {
    let block = block_matrix(x.base(), z, y.base())?;
    loewner_compare(&block, &HermitianMatrix::zeros(block.dim()), tol)
}

/// Block-matrix characterization of `X#Y`: with `Z = X#Y` the block matrix
/// must be positive semidefinite (verdict `GreaterEqual` or `Equal`).
pub fn check_geometric_block(
    x: &PositiveDefiniteMatrix,
    y: &PositiveDefiniteMatrix,
    tol: f64,
) -> Result<LoewnerVerdict> {
    let z = geometric_mean(x, y)?;
    geometric_block_verdict(x, y, z.base(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Relation, DEFAULT_LOEWNER_TOL};
    use crate::random::random_pd;

    fn reference_s() -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::from_real_rows(&[&[1.1, 0.0], &[0.0, 0.1]]).unwrap()
    }

    fn reference_t() -> PositiveDefiniteMatrix {
        PositiveDefiniteMatrix::from_real_rows(&[&[7.17, -4.41], &[-4.41, 3.13]]).unwrap()
    }

    fn close(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> bool {
        max_abs(&(a.as_matrix() - b.as_matrix())) <= tol
    }

    #[test]
    fn arithmetic_examples() {
        let p = random_pd(3, 10.0, 1);
        assert!(close(arithmetic_mean(&p, &p).unwrap().base(), p.base(), 1e-15));
        let a = PositiveDefiniteMatrix::from_diagonal(&[1.0, 3.0]).unwrap();
        let b = PositiveDefiniteMatrix::from_diagonal(&[3.0, 1.0]).unwrap();
        let m = arithmetic_mean(&a, &b).unwrap();
        assert!(close(m.base(), &HermitianMatrix::from_diagonal(&[2.0, 2.0]), 0.0));
        let st = arithmetic_mean(&reference_s(), &reference_t()).unwrap();
        let expected = HermitianMatrix::from_real_rows(&[&[4.135, -2.205], &[-2.205, 1.615]]).unwrap();
        assert!(close(st.base(), &expected, 1e-15));
    }

    #[test]
    fn harmonic_examples() {
        let p = random_pd(3, 10.0, 2);
        assert!(close(harmonic_mean(&p, &p).unwrap().base(), p.base(), 1e-13));
        let a = PositiveDefiniteMatrix::from_diagonal(&[1.0, 3.0]).unwrap();
        let b = PositiveDefiniteMatrix::from_diagonal(&[3.0, 1.0]).unwrap();
        let m = harmonic_mean(&a, &b).unwrap();
        assert!(close(m.base(), &HermitianMatrix::from_diagonal(&[1.5, 1.5]), 1e-15));

        let x = random_pd(4, 100.0, 3);
        let y = random_pd(4, 100.0, 4);
        let (_, discrepancy) = harmonic_mean_checked(&x, &y, HARMONIC_SELF_CHECK_TOL).unwrap();
        assert!(discrepancy <= 1e-10);
        assert!(matches!(
            harmonic_mean(&x, &random_pd(3, 10.0, 1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn geometric_mean_of_reference_pair() {
        let g = geometric_mean(&reference_s(), &reference_t()).unwrap();
        let expected = [[1.85834, -0.63486], [-0.63486, 0.52569]];
        for (i, row) in expected.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                let e = g.base().entry(i, j);
                assert!((e.re - want).abs() < 1e-4, "entry ({i},{j}) = {e}");
                assert!(e.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn geometric_trivial_cases() {
        let p = random_pd(3, 10.0, 5);
        assert!(close(geometric_mean(&p, &p).unwrap().base(), p.base(), 1e-13));
        let a = PositiveDefiniteMatrix::from_diagonal(&[1.0, 4.0]).unwrap();
        let b = PositiveDefiniteMatrix::from_diagonal(&[4.0, 1.0]).unwrap();
        let g = geometric_mean(&a, &b).unwrap();
        assert!(close(g.base(), &HermitianMatrix::from_diagonal(&[2.0, 2.0]), 1e-14));
    }

    #[test]
    fn block_characterization() {
        let i = PositiveDefiniteMatrix::identity(2);
        let v = check_geometric_block(&i, &i, DEFAULT_LOEWNER_TOL).unwrap();
        assert!(v.holds_ge(), "{v:?}");
        assert!(v.ge_margin.abs() < 1e-14);

        let v = check_geometric_block(&reference_s(), &reference_t(), DEFAULT_LOEWNER_TOL).unwrap();
        assert!(v.holds_ge(), "{v:?}");

        let x = random_pd(3, 100.0, 6);
        let y = random_pd(3, 100.0, 7);
        let v = check_geometric_block(&x, &y, DEFAULT_LOEWNER_TOL).unwrap();
        assert!(v.holds_ge());
        let z = geometric_mean(&x, &y).unwrap();
        let bumped = z.base() + &HermitianMatrix::identity(3).scale(0.01);
        let v = geometric_block_verdict(&x, &y, &bumped, DEFAULT_LOEWNER_TOL).unwrap();
        assert!(!v.holds_ge(), "{v:?}");
        assert!(matches!(v.relation, Relation::Incomparable | Relation::LessEqual));
        assert!(v.ge_margin < -v.slack());
    }

    #[test]
    fn mean_names() {
        for m in MeanKind::ALL {
            assert_eq!(m.name().parse::<MeanKind>().unwrap(), m);
        }
        assert_eq!("median".parse::<MeanKind>(), Err(Error::UnknownMean("median".into())));
    }
}
