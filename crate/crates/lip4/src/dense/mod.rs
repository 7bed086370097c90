//! Spectral-norm estimators for dense matrices.
//!
//! `gram_rescaled` is the workhorse: after `t` iterations its bound equals
//! the Schatten 2^t norm of the input, which upper-bounds the spectral norm
//! at every `t` and converges to it superlinearly. `power_iteration` is the
//! classical baseline (a lower estimate in practice), `gram_naive` the
//! rescaling-free variant kept for its overflow failure mode, `gram_eigen`
//! the squaring variant that targets the spectral radius of square matrices.

mod gradient;
pub(crate) mod gram;
mod power;
mod vectors;

pub use gradient::gram_bound_gradient;
pub use gram::{gram_eigen, gram_naive, gram_rescaled, ScaledGram};
pub use power::power_iteration;
pub use vectors::{singular_vectors, SingularTriple};

use serde::Serialize;
use thiserror::Error;

/// Which estimator produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DenseMethod {
    PowerIteration,
    GramNaive,
    GramRescaled,
    SvdExact,
    GramEigen,
}

impl std::fmt::Display for DenseMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DenseMethod::PowerIteration => "power_iteration",
            DenseMethod::GramNaive => "gram_naive",
            DenseMethod::GramRescaled => "gram_rescaled",
            DenseMethod::SvdExact => "svd_exact",
            DenseMethod::GramEigen => "gram_eigen",
        };
        f.write_str(s)
    }
}

/// Result of a dense spectral-norm estimate.
///
/// `trace` holds the per-iteration estimate; when non-empty its last entry
/// equals `value` and its length equals `iterations`.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub method: DenseMethod,
    pub value: f64,
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub elapsed_seconds: f64,
}

/// Errors from the dense estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(
        "gram iterate overflowed to non-finite values at iteration {iteration}; \
         use gram_rescaled, which keeps the iterate in floating-point range"
    )]
    Overflow { iteration: usize },
    #[error("the eigenvalue variant needs a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("the spectral bound is not differentiable at the zero matrix")]
    ZeroGradient,
    #[error("power iteration hit a zero vector twice (input is rank-deficient in a way the start vector cannot escape)")]
    PowerBreakdown,
    #[error("gram iterate has no usable column; top singular value appears degenerate or defective")]
    DegenerateVectors,
}
