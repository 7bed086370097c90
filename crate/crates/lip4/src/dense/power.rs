use std::time::Instant;

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;
use crate::synth;

use super::{DenseMethod, EstimateReport, SpectralError};

/// Power iteration for the largest singular value.
///
/// Starting from a seeded Gaussian vector `u`, alternates
/// `v <- G u / ||G u||`, `u <- G* v / ||G* v||` for `n_iter` rounds; the
/// estimate after each round is the Rayleigh value `|(G u)* v|`, which can
/// only underestimate the spectral norm. The zero matrix returns 0
/// immediately. If an intermediate vector collapses to zero (start vector
/// orthogonal to the row space of a rank-deficient input) the iteration is
/// restarted once from the next seed before giving up.
pub fn power_iteration(
    g: &ComplexMatrix,
    n_iter: usize,
    seed: u64,
) -> Result<EstimateReport, SpectralError> {
    assert!(n_iter >= 1, "n_iter must be positive");
    let start = Instant::now();
    if g.is_zero() {
        return Ok(EstimateReport {
            method: DenseMethod::PowerIteration,
            value: 0.0,
            trace: Vec::new(),
            iterations: 0,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
    }

    for attempt in 0..2u64 {
        if let Some(trace) = run(g, n_iter, seed + attempt) {
            return Ok(EstimateReport {
                method: DenseMethod::PowerIteration,
                value: *trace.last().expect("n_iter >= 1"),
                iterations: trace.len(),
                trace,
                elapsed_seconds: start.elapsed().as_secs_f64(),
            });
        }
    }
    Err(SpectralError::PowerBreakdown)
}

/// One full run; `None` signals a zero intermediate vector.
fn run(g: &ComplexMatrix, n_iter: usize, seed: u64) -> Option<Vec<f64>> {
    let mut u: Vec<Complex64> = synth::standard_normal(g.cols(), seed)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    normalize(&mut u)?;

    let mut trace = Vec::with_capacity(n_iter);
    for _ in 0..n_iter {
        let mut v = g.matvec(&u);
        normalize(&mut v)?;
        let mut z = g.adjoint_matvec(&v);
        normalize(&mut z)?;
        u = z;
        // Rayleigh estimate (G u)* v with the fresh pair.
        let gu = g.matvec(&u);
        let rayleigh: Complex64 = gu.iter().zip(&v).map(|(&a, &b)| a.conj() * b).sum();
        trace.push(rayleigh.norm());
    }
    Some(trace)
}

fn normalize(v: &mut [Complex64]) -> Option<()> {
    let norm = v
        .iter()
        .map(|z| z.re * z.re + z.im * z.im)
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return None;
    }
    for z in v.iter_mut() {
        *z /= norm;
    }
    Some(())
}
