use num_complex::Complex64;

use crate::linalg::ComplexMatrix;

use super::{ScaledGram, SpectralError};

/// Top singular pair `(left, right, sigma)` with `g * right ~= sigma * left`.
#[derive(Debug, Clone)]
pub struct SingularTriple {
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
    pub sigma: f64,
}

/// Recovers the top singular vectors from the final Gram iterate.
///
/// After enough iterations the (rescaled) iterate acts as a projector onto
/// the top right-singular direction, so any non-vanishing column is a
/// multiple of it; the column with the largest norm is taken. The left
/// vector follows by one application of `g`. Requires a simple top singular
/// value and `n_iter >= 2`.
pub fn singular_vectors(
    g: &ComplexMatrix,
    n_iter: usize,
) -> Result<SingularTriple, SpectralError> {
    assert!(n_iter >= 2, "n_iter must be at least 2");
    if g.is_zero() {
        return Err(SpectralError::DegenerateVectors);
    }

    let mut sg = ScaledGram::start(g);
    for _ in 1..n_iter {
        sg.advance_gram();
    }
    let iterate = sg.iterate();

    let mut best = (0usize, 0.0f64);
    for j in 0..iterate.cols() {
        let norm: f64 = (0..iterate.rows())
            .map(|r| iterate.get(r, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if norm > best.1 {
            best = (j, norm);
        }
    }
    if best.1 == 0.0 {
        return Err(SpectralError::DegenerateVectors);
    }

    let right: Vec<Complex64> = (0..iterate.rows())
        .map(|r| iterate.get(r, best.0) / best.1)
        .collect();
    let image = g.matvec(&right);
    let sigma = image
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if sigma == 0.0 {
        return Err(SpectralError::DegenerateVectors);
    }
    let left = image.iter().map(|&z| z / sigma).collect();

    Ok(SingularTriple { left, right, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd;
    use crate::synth;

    fn residual(g: &ComplexMatrix, triple: &SingularTriple) -> f64 {
        let image = g.matvec(&triple.right);
        image
            .iter()
            .zip(&triple.left)
            .map(|(&a, &b)| (a - triple.sigma * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn diagonal_case() {
        let g = ComplexMatrix::from_real(2, 2, &[3.0, 0.0, 0.0, 1.0]).unwrap();
        let t = singular_vectors(&g, 8).unwrap();
        assert!((t.sigma - 3.0).abs() < 1e-12);
        assert!((t.right[0].norm() - 1.0).abs() < 1e-10);
        assert!(t.right[1].norm() < 1e-10);
        assert!((t.left[0].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rank_one_closed_form() {
        // g = a b^T with a in R^3, b in R^2.
        let a = [1.0, -2.0, 2.0]; // norm 3
        let b = [3.0, 4.0]; // norm 5
        let entries: Vec<f64> = a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect();
        let g = ComplexMatrix::from_real(3, 2, &entries).unwrap();
        let t = singular_vectors(&g, 8).unwrap();
        assert!((t.sigma - 15.0).abs() < 1e-8);
        // right = +-b/||b||, left = +-a/||a||.
        let sign = t.right[0].re.signum();
        assert!((t.right[0].re - sign * 0.6).abs() < 1e-8);
        assert!((t.right[1].re - sign * 0.8).abs() < 1e-8);
        let sign = t.left[0].re.signum();
        for (i, &ai) in a.iter().enumerate() {
            assert!((t.left[i].re - sign * ai / 3.0).abs() < 1e-8);
        }
        assert!(residual(&g, &t) <= 1e-8 * t.sigma);
    }

    #[test]
    fn gaussian_matrix_residual() {
        let g = synth::gaussian_matrix(40, 25, 2);
        let t = singular_vectors(&g, 12).unwrap();
        let sigma1 = svd(&g).unwrap().spectral_norm();
        assert!((t.sigma - sigma1).abs() <= 1e-6 * sigma1);
        assert!(residual(&g, &t) <= 1e-6 * t.sigma);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(singular_vectors(&ComplexMatrix::zeros(3, 3), 4).is_err());
    }
}
