//! Dense complex linear algebra: the row-major [`ComplexMatrix`] carrier,
//! unnormalized 2-D DFT, and a one-sided Jacobi SVD that serves as the
//! reference oracle for every estimator in this crate.

pub(crate) mod fft;
mod matrix;
mod svd;
mod tensor;

pub use fft::dft2;
pub use matrix::ComplexMatrix;
pub use svd::{svd, SvdResult};
pub use tensor::RealTensor4;

use thiserror::Error;

/// Errors from dense linear-algebra operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: left is {}x{}, right is {}x{}", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("entry count {len} does not match {rows}x{cols}")]
    BadLength { rows: usize, cols: usize, len: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
    #[error("matrix dimensions must be positive")]
    EmptyMatrix,
    #[error("SVD did not converge after {sweeps} sweeps (best off-diagonal residual {residual:.3e})")]
    SvdNonConvergence { sweeps: usize, residual: f64 },
}
