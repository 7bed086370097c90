//! Spatial-domain convolution: the direct operator and its adjoint for both
//! paddings, the matrix-free power-iteration baseline, and the materialized
//! dense operator used as a test oracle.
//!
//! Conventions: inputs are `c_in * n^2` vectors (channel-major, row-major
//! within a channel), outputs `c_out * n^2`, the kernel is anchored at the
//! index origin. Circular padding wraps indices modulo `n` (a doubly-block
//! circulant operator); zero padding drops the wrapped terms (doubly-block
//! Toeplitz).

use std::time::Instant;

use num_complex::Complex64;

use crate::batch;
use crate::linalg::ComplexMatrix;
use crate::synth;

use super::{ConvBoundReport, ConvError, ConvKernel, ConvMethod, Padding};

/// Per-side size guard for [`materialize_conv_operator`].
pub const MATERIALIZE_LIMIT: usize = 4096;

/// `y[o][u][v] = sum_{i,a,b} K[o][i][a][b] * x[i][u-a][v-b]` with wrap or
/// drop at the boundary depending on the padding.
pub(crate) fn apply_forward(kernel: &ConvKernel, x: &[f64], y: &mut [f64]) {
    let n = kernel.input_size();
    let (c_out, c_in, k) = (kernel.c_out(), kernel.c_in(), kernel.k());
    debug_assert_eq!(x.len(), c_in * n * n);
    debug_assert_eq!(y.len(), c_out * n * n);
    y.fill(0.0);
    for o in 0..c_out {
        for i in 0..c_in {
            let plane = &x[i * n * n..(i + 1) * n * n];
            let out = &mut y[o * n * n..(o + 1) * n * n];
            for a in 0..k {
                for b in 0..k {
                    let w = kernel.filter().get(o, i, a, b);
                    if w == 0.0 {
                        continue;
                    }
                    match kernel.padding() {
                        Padding::Circular => {
                            for u in 0..n {
                                let su = (u + n - a) % n;
                                for v in 0..n {
                                    let sv = (v + n - b) % n;
                                    out[u * n + v] += w * plane[su * n + sv];
                                }
                            }
                        }
                        Padding::Zero => {
                            for u in a..n {
                                for v in b..n {
                                    out[u * n + v] += w * plane[(u - a) * n + (v - b)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Adjoint of [`apply_forward`]: correlation with the kernel, wrapped or
/// cropped to match the padding.
pub(crate) fn apply_adjoint(kernel: &ConvKernel, y: &[f64], x: &mut [f64]) {
    let n = kernel.input_size();
    let (c_out, c_in, k) = (kernel.c_out(), kernel.c_in(), kernel.k());
    debug_assert_eq!(y.len(), c_out * n * n);
    debug_assert_eq!(x.len(), c_in * n * n);
    x.fill(0.0);
    for o in 0..c_out {
        for i in 0..c_in {
            let plane = &y[o * n * n..(o + 1) * n * n];
            let out = &mut x[i * n * n..(i + 1) * n * n];
            for a in 0..k {
                for b in 0..k {
                    let w = kernel.filter().get(o, i, a, b);
                    if w == 0.0 {
                        continue;
                    }
                    match kernel.padding() {
                        Padding::Circular => {
                            for p in 0..n {
                                let sp = (p + a) % n;
                                for q in 0..n {
                                    let sq = (q + b) % n;
                                    out[p * n + q] += w * plane[sp * n + sq];
                                }
                            }
                        }
                        Padding::Zero => {
                            for p in 0..n - a {
                                for q in 0..n - b {
                                    out[p * n + q] += w * plane[(p + a) * n + (q + b)];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Power iteration on the layer operator itself (direct convolution and
/// transpose convolution, stride 1), so it works for either padding. With
/// circular padding it estimates the same value as the frequency-domain
/// methods; with zero padding it estimates the norm of the doubly-block
/// Toeplitz operator, which has no frequency decomposition.
pub fn conv_power_iteration(
    kernel: &ConvKernel,
    n_iter: usize,
    seed: u64,
) -> Result<ConvBoundReport, ConvError> {
    assert!(n_iter >= 1, "n_iter must be positive");
    kernel.ensure_spectral("conv_power_iteration")?;
    let start = Instant::now();
    let n = kernel.input_size();
    let (dim_in, dim_out) = (kernel.c_in() * n * n, kernel.c_out() * n * n);

    if kernel.filter().is_zero() {
        return Ok(ConvBoundReport {
            method: ConvMethod::ConvPowerIteration,
            value: 0.0,
            argmax_block: None,
            iterations: 0,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            trace: Vec::new(),
        });
    }

    let mut trace = Vec::with_capacity(n_iter);
    'attempt: for attempt in 0..2u64 {
        trace.clear();
        let mut u = synth::standard_normal(dim_in, seed + attempt);
        if normalize(&mut u).is_none() {
            continue;
        }
        let mut v = vec![0.0; dim_out];
        let mut z = vec![0.0; dim_in];
        let mut w = vec![0.0; dim_out];
        for _ in 0..n_iter {
            apply_forward(kernel, &u, &mut v);
            if normalize(&mut v).is_none() {
                continue 'attempt;
            }
            apply_adjoint(kernel, &v, &mut z);
            if normalize(&mut z).is_none() {
                continue 'attempt;
            }
            std::mem::swap(&mut u, &mut z);
            apply_forward(kernel, &u, &mut w);
            let rayleigh: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
            trace.push(rayleigh.abs());
        }
        return Ok(ConvBoundReport {
            method: ConvMethod::ConvPowerIteration,
            value: *trace.last().expect("n_iter >= 1"),
            argmax_block: None,
            iterations: trace.len(),
            elapsed_seconds: start.elapsed().as_secs_f64(),
            trace,
        });
    }
    Err(ConvError::Linalg(crate::linalg::LinalgError::NonFinite))
}

/// Dense matrix of the layer operator, built column-by-column by pushing
/// unit impulses through the direct convolution. Ground truth for both
/// paddings, guarded to desk scale.
pub fn materialize_conv_operator(kernel: &ConvKernel) -> Result<ComplexMatrix, ConvError> {
    kernel.ensure_spectral("materialize_conv_operator")?;
    let n = kernel.input_size();
    let rows = kernel.c_out() * n * n;
    let cols = kernel.c_in() * n * n;
    if rows > MATERIALIZE_LIMIT || cols > MATERIALIZE_LIMIT {
        return Err(ConvError::OperatorTooLarge {
            rows,
            cols,
            limit: MATERIALIZE_LIMIT,
        });
    }

    let indices: Vec<usize> = (0..cols).collect();
    let columns = batch::map(&indices, |&col| {
        let mut x = vec![0.0; cols];
        x[col] = 1.0;
        let mut y = vec![0.0; rows];
        apply_forward(kernel, &x, &mut y);
        y
    });

    let mut out = ComplexMatrix::zeros(rows, cols);
    for (col, column) in columns.into_iter().enumerate() {
        for (row, value) in column.into_iter().enumerate() {
            out.set(row, col, Complex64::new(value, 0.0));
        }
    }
    Ok(out)
}

fn normalize(v: &mut [f64]) -> Option<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return None;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    Some(())
}
