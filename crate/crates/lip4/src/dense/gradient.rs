use crate::linalg::ComplexMatrix;

use super::{gram_rescaled, SpectralError};

/// Explicit gradient of the step-`t` Gram bound with respect to the input:
///
/// `d(||G^(t)||_F^(2^(1-t))) / dG = G (G* G)^(2^(t-1) - 1) / ||G^(t)||_F^(2 (1 - 2^-t))`
///
/// The input is pre-divided by its step-`t` spectral bound so the matrix
/// powers stay in floating-point range; the expression is homogeneous of
/// degree zero under positive scaling, so no unscaling is needed afterwards.
pub fn gram_bound_gradient(g: &ComplexMatrix, t: usize) -> Result<ComplexMatrix, SpectralError> {
    assert!(t >= 1, "t must be positive");
    if g.is_zero() {
        return Err(SpectralError::ZeroGradient);
    }
    if t == 1 {
        // d||G||_F / dG = G / ||G||_F.
        return Ok(g.scale(1.0 / g.frobenius_norm()));
    }

    let bound = gram_rescaled(g, t).value;
    let scaled = g.scale(1.0 / bound);

    // (G* G)^(2^(t-1) - 1) as the product of the repeated squares
    // P^(2^j), j = 0..t-2 (the exponent is all ones in binary), which also
    // yields ||G^(t)||_F from the last square.
    let p = scaled.gram_of();
    let mut power = p.clone();
    let mut product = p.clone();
    for _ in 0..t.saturating_sub(2) {
        power = power.matmul(&power).expect("square");
        product = product.matmul(&power).expect("square");
    }
    // After the loop `power` is P^(2^(t-2)), i.e. the step-t Gram iterate of
    // the scaled input.
    let iterate_norm = power.frobenius_norm();

    let numerator = scaled.matmul(&product).expect("shapes agree");
    let denom = iterate_norm.powf(2.0 * (1.0 - 2f64.powi(-(t as i32))));
    Ok(numerator.scale(1.0 / denom))
}
