use std::time::Instant;

use crate::linalg::ComplexMatrix;

use super::{DenseMethod, EstimateReport, SpectralError};

/// A Gram iterate kept in floating-point range by per-step rescaling.
///
/// The stored `iterate` is the true iterate divided by `exp(log_scale)`; the
/// accumulator makes the unscaled bound recoverable exactly in the log
/// domain, so the bound stays finite for inputs scaled anywhere in the f64
/// range and for large iteration counts. For `t >= 2` the Gram-advanced
/// iterate is Hermitian positive semidefinite.
#[derive(Debug, Clone)]
pub struct ScaledGram {
    iterate: ComplexMatrix,
    log_scale: f64,
    t: usize,
}

impl ScaledGram {
    /// Starts at `t = 1` with the raw matrix. The caller must rule out the
    /// zero matrix first (the rescale step divides by the Frobenius norm).
    pub fn start(g: &ComplexMatrix) -> Self {
        debug_assert!(!g.is_zero(), "ScaledGram::start needs a nonzero matrix");
        Self {
            iterate: g.clone(),
            log_scale: 0.0,
            t: 1,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn iterate(&self) -> &ComplexMatrix {
        &self.iterate
    }

    /// Unscaled bound at the current step: the Schatten 2^t norm of the
    /// original matrix, evaluated as `exp(2^(1-t) * (log_scale + ln ||H||_F))`.
    pub fn bound(&self) -> f64 {
        let ln = self.log_scale + self.iterate.frobenius_norm().ln();
        (pow2(1 - self.t as i32) * ln).exp()
    }

    /// One Gram step: rescale by the Frobenius norm, then `H <- H* H`.
    pub fn advance_gram(&mut self) {
        self.advance(false);
    }

    /// One squaring step (`H <- H H`), for the spectral-radius variant.
    /// Requires a square iterate.
    pub fn advance_square(&mut self) {
        self.advance(true);
    }

    fn advance(&mut self, square: bool) {
        let s = self.iterate.frobenius_norm();
        let h = self.iterate.scale(1.0 / s);
        self.iterate = if square {
            h.matmul(&h).expect("square iterate")
        } else {
            h.gram_of()
        };
        self.log_scale = 2.0 * (self.log_scale + s.ln());
        self.t += 1;
    }
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Rescaled Gram iteration. After `n_iter` iterations the value equals the
/// Schatten 2^n_iter norm of `g` up to roundoff; the trace holds the bound at
/// every step and is non-increasing, with each entry an upper bound on the
/// spectral norm. The zero matrix yields value 0 with an empty trace.
pub fn gram_rescaled(g: &ComplexMatrix, n_iter: usize) -> EstimateReport {
    assert!(n_iter >= 1, "n_iter must be positive");
    let start = Instant::now();
    let trace = rescaled_trace(g, n_iter, false);
    report(DenseMethod::GramRescaled, trace, start)
}

/// Squaring variant for square matrices: the value upper-bounds the spectral
/// radius at every step and converges to it.
pub fn gram_eigen(g: &ComplexMatrix, n_iter: usize) -> Result<EstimateReport, SpectralError> {
    assert!(n_iter >= 1, "n_iter must be positive");
    if g.rows() != g.cols() {
        return Err(SpectralError::NotSquare {
            rows: g.rows(),
            cols: g.cols(),
        });
    }
    let start = Instant::now();
    let trace = rescaled_trace(g, n_iter, true);
    Ok(report(DenseMethod::GramEigen, trace, start))
}

/// Shared driver; returns one bound per step (empty for the zero matrix).
pub(crate) fn rescaled_trace(g: &ComplexMatrix, n_iter: usize, square: bool) -> Vec<f64> {
    if g.is_zero() {
        return Vec::new();
    }
    let mut sg = ScaledGram::start(g);
    let mut trace = Vec::with_capacity(n_iter);
    trace.push(sg.bound());
    for _ in 1..n_iter {
        if square {
            sg.advance_square();
        } else {
            sg.advance_gram();
        }
        trace.push(sg.bound());
    }
    trace
}

/// Gram iteration without rescaling. Overflows for inputs whose norm
/// squares out of f64 range; kept as the reference for why the rescaled
/// variant exists.
pub fn gram_naive(g: &ComplexMatrix, n_iter: usize) -> Result<EstimateReport, SpectralError> {
    assert!(n_iter >= 1, "n_iter must be positive");
    let start = Instant::now();
    if g.is_zero() {
        return Ok(report(DenseMethod::GramNaive, Vec::new(), start));
    }
    let mut iterate = g.clone();
    let mut trace = Vec::with_capacity(n_iter);
    trace.push(unguarded_frobenius(&iterate));
    for t in 2..=n_iter {
        iterate = iterate.gram_of();
        let frob = unguarded_frobenius(&iterate);
        if !frob.is_finite() || !iterate.is_finite() {
            return Err(SpectralError::Overflow { iteration: t });
        }
        trace.push(frob.powf(pow2(1 - t as i32)));
    }
    Ok(report(DenseMethod::GramNaive, trace, start))
}

/// Plain sum of squares, no overflow guard: this failure mode is the reason
/// the rescaled variant exists, so the naive path must keep it observable.
fn unguarded_frobenius(m: &ComplexMatrix) -> f64 {
    m.entries()
        .iter()
        .map(|z| z.re * z.re + z.im * z.im)
        .sum::<f64>()
        .sqrt()
}

fn report(method: DenseMethod, trace: Vec<f64>, start: Instant) -> EstimateReport {
    EstimateReport {
        method,
        value: trace.last().copied().unwrap_or(0.0),
        iterations: trace.len(),
        trace,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}
