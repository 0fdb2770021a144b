//! Dense complex matrix kernels.

mod eigen;
mod lu;
mod matrix;

pub use eigen::{
    eigen_full, eigenvalues, hessenberg_in_place, pair_conjugates, schur, triangular_eigenvectors,
    ConjugatePairing, EigenSystem, Schur, KAPPA_MAX, MAX_QR_ITERS, TAU_BIO, TAU_EIG,
};
pub use lu::{condition_estimate, determinant, invert, solve, Lu};
pub use matrix::{frobenius_norm, ComplexMatrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("singular matrix (pivot {pivot} below floor)")]
    Singular { pivot: usize },
    #[error("QR iteration did not converge for eigenvalue {index}")]
    NoConvergence { index: usize },
    #[error("eigenvector basis is nearly defective (condition {condition:.3e})")]
    NearDefective { condition: f64 },
    #[error("cannot pair {len} values into conjugate pairs")]
    OddCount { len: usize },
}
