#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod funcalc;
pub mod matrix;
pub mod means;
pub mod outcome;
pub mod posmaps;
pub mod random;
pub mod verifier;

pub use error::{Error, Result};
pub use matrix::{
    loewner_compare, make_hermitian, spectral_decompose, CMatrix, HermitianMatrix, LoewnerVerdict,
    PositiveDefiniteMatrix, Relation, SpectralDecomposition,
};
pub use num_complex::Complex64;
