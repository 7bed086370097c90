//! Spectral-norm bounds for multi-channel 2-D convolutional layers.
//!
//! With circular padding the layer operator is block-diagonalized by the 2-D
//! DFT into `n^2` blocks of shape `c_out x c_in`, one per frequency; its
//! spectral norm is the max of the block spectral norms. [`gram_conv`] runs
//! the rescaled Gram iteration on every block (an independent batch, mapped
//! through [`crate::batch`]), [`exact_conv_spectrum`] takes per-block SVDs,
//! and [`conv_power_iteration`] is the matrix-free spatial-domain baseline
//! that also covers zero padding. [`materialize_conv_operator`] builds the
//! dense operator for either padding as the desk-scale test oracle.

mod blocks;
mod spatial;

pub use blocks::{exact_conv_spectrum, extract_blocks, gram_conv, gram_conv_subsampled};
pub use spatial::{conv_power_iteration, materialize_conv_operator, MATERIALIZE_LIMIT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError, RealTensor4};

/// Padding mode of a convolutional layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Circular,
    Zero,
}

/// A convolutional layer: filter of shape `c_out x c_in x k x k` applied to
/// `n x n` inputs with the given padding, stride 1 for all spectral
/// operations.
#[derive(Debug, Clone)]
pub struct ConvKernel {
    filter: RealTensor4,
    input_size: usize,
    padding: Padding,
    stride: usize,
}

impl ConvKernel {
    pub fn new(filter: RealTensor4, input_size: usize, padding: Padding) -> Result<Self, ConvError> {
        Self::with_stride(filter, input_size, padding, 1)
    }

    pub fn with_stride(
        filter: RealTensor4,
        input_size: usize,
        padding: Padding,
        stride: usize,
    ) -> Result<Self, ConvError> {
        let (_, _, kh, kw) = filter.dims();
        if kh != kw {
            return Err(ConvError::NonSquareKernel { kh, kw });
        }
        if kh > input_size {
            return Err(ConvError::KernelExceedsInput {
                k: kh,
                n: input_size,
            });
        }
        if stride == 0 {
            return Err(ConvError::BadStride { stride });
        }
        Ok(Self {
            filter,
            input_size,
            padding,
            stride,
        })
    }

    pub fn filter(&self) -> &RealTensor4 {
        &self.filter
    }

    pub fn c_out(&self) -> usize {
        self.filter.dims().0
    }

    pub fn c_in(&self) -> usize {
        self.filter.dims().1
    }

    pub fn k(&self) -> usize {
        self.filter.dims().2
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn padding(&self) -> Padding {
        self.padding
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Same filter viewed at a different spatial size.
    pub fn resized(&self, input_size: usize) -> Result<Self, ConvError> {
        Self::with_stride(self.filter.clone(), input_size, self.padding, self.stride)
    }

    pub(crate) fn ensure_spectral(&self, op: &'static str) -> Result<(), ConvError> {
        if self.stride != 1 {
            return Err(ConvError::StrideUnsupported {
                op,
                stride: self.stride,
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_circular(&self, op: &'static str) -> Result<(), ConvError> {
        self.ensure_spectral(op)?;
        if self.padding != Padding::Circular {
            return Err(ConvError::CircularOnly { op });
        }
        Ok(())
    }
}

/// The `n^2` frequency blocks of a circular convolutional layer, each of
/// shape `c_out x c_in`; block `u*n + v` belongs to frequency `(u, v)`.
#[derive(Debug, Clone)]
pub struct BlockDiagSpectrum {
    blocks: Vec<ComplexMatrix>,
    n: usize,
}

impl BlockDiagSpectrum {
    pub(crate) fn new(blocks: Vec<ComplexMatrix>, n: usize) -> Self {
        debug_assert_eq!(blocks.len(), n * n);
        Self { blocks, n }
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn frequency_of(&self, index: usize) -> (usize, usize) {
        (index / self.n, index % self.n)
    }
}

/// Which conv estimator produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvMethod {
    GramConv,
    ExactSvdPerBlock,
    ConvPowerIteration,
    GramConvSubsampled,
}

impl std::fmt::Display for ConvMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConvMethod::GramConv => "gram_conv",
            ConvMethod::ExactSvdPerBlock => "exact_svd_per_block",
            ConvMethod::ConvPowerIteration => "conv_power_iteration",
            ConvMethod::GramConvSubsampled => "gram_conv_subsampled",
        };
        f.write_str(s)
    }
}

/// Result of a conv spectral-norm estimate. `argmax_block` is the frequency
/// `(u, v)` where the per-block maximum is attained, when the method has
/// one; `trace` holds the per-iteration bound (max over blocks) for the
/// iterative methods and is empty for the exact method.
#[derive(Debug, Clone, Serialize)]
pub struct ConvBoundReport {
    pub method: ConvMethod,
    pub value: f64,
    pub argmax_block: Option<(usize, usize)>,
    pub iterations: usize,
    pub elapsed_seconds: f64,
    pub trace: Vec<f64>,
}

/// Errors from the conv estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvError {
    #[error("kernel size {k} exceeds input size {n}")]
    KernelExceedsInput { k: usize, n: usize },
    #[error("kernel spatial dims must be square, got {kh}x{kw}")]
    NonSquareKernel { kh: usize, kw: usize },
    #[error("stride must be positive, got {stride}")]
    BadStride { stride: usize },
    #[error("{op} requires stride 1, got {stride}")]
    StrideUnsupported { op: &'static str, stride: usize },
    #[error("{op} requires circular padding")]
    CircularOnly { op: &'static str },
    #[error("sub-sampled size {n0} is below the kernel size {k}")]
    SubsampleTooSmall { n0: usize, k: usize },
    #[error("sub-sampled size {n0} exceeds the declared input size {n}")]
    SubsampleTooLarge { n0: usize, n: usize },
    #[error("materialized operator would be {rows}x{cols}; the desk-scale guard is {limit} per side")]
    OperatorTooLarge {
        rows: usize,
        cols: usize,
        limit: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
