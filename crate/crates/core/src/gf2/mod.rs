//! Dense linear algebra over GF(2) and binary polynomial arithmetic.

mod matrix;
mod poly;
mod vector;

pub use matrix::{sylvester, BitMatrix, MAX_DIM};
pub use poly::BinPoly;
pub use vector::BitVector;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Gf2Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix dimension {0} outside 1..={max}", max = MAX_DIM)]
    InvalidDimension(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("Sylvester matrix needs a modulus of at least 3, got {0}")]
    SylvesterTooSmall(usize),
    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
}
