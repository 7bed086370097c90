//! Spectral-norm upper bounds for dense matrices and multi-channel
//! convolutional layers, plus whole-network Lipschitz composition.
//!
//! The core estimator iterates the Gram map `G -> G* G` with a log-domain
//! rescale accumulator, so that after `t` iterations the unscaled Frobenius
//! norm of the iterate is exactly the Schatten 2^t norm of the input, a
//! certified upper bound on the spectral norm that converges superlinearly.
//! Baselines (power iteration, exact per-frequency SVD, zero-padding operator
//! power iteration) share the same report types so they can be compared in
//! benchmarks and in the `lip4` CLI.
//!
//! Layout:
//! - [`linalg`]: dense complex matrices, 2-D DFT, one-sided Jacobi SVD oracle
//! - [`dense`]: spectral-norm estimators for matrices, bound gradient,
//!   singular-vector recovery, eigenvalue (squaring) variant
//! - [`conv`]: per-frequency block extraction, batched Gram bounds, spatial
//!   convolution baselines and the materialized-operator test oracle
//! - [`network`]: per-layer Lipschitz rules and whole-network composition
//! - [`lipk`]: the LIPK weight container used by the CLI and network specs

pub mod batch;
pub mod conv;
pub mod dense;
pub mod linalg;
pub mod lipk;
pub mod network;
pub mod synth;

pub use conv::{BlockDiagSpectrum, ConvBoundReport, ConvError, ConvKernel, ConvMethod, Padding};
pub use dense::{DenseMethod, EstimateReport, ScaledGram, SingularTriple, SpectralError};
pub use linalg::{ComplexMatrix, LinalgError, RealTensor4, SvdResult};
pub use network::{
    Activation, BoundMethod, Layer, NetworkBoundReport, NetworkError, NetworkSpec,
};
