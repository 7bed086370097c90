//! Seeded synthetic inputs. Everything here is deterministic given the seed,
//! across runs and platforms, so CLI sweeps and tests are reproducible.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{ComplexMatrix, RealTensor4};

/// Standard normal samples via Box-Muller on a ChaCha stream.
pub fn standard_normal(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(len);
    while out.len() < len {
        // u1 in (0, 1] so the log is finite.
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        if out.len() < len {
            out.push(r * theta.sin());
        }
    }
    out
}

/// Real Gaussian matrix (entries N(0,1)).
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let data = standard_normal(rows * cols, seed);
    ComplexMatrix::from_real(rows, cols, &data).expect("finite gaussian entries")
}

/// Complex Gaussian matrix (real and imaginary parts N(0,1)).
pub fn gaussian_complex_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    let data = standard_normal(2 * rows * cols, seed);
    let entries = data
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    ComplexMatrix::new(rows, cols, entries).expect("finite gaussian entries")
}

/// Gaussian convolution filter of shape `c_out x c_in x k x k`.
pub fn gaussian_kernel(c_out: usize, c_in: usize, k: usize, seed: u64) -> RealTensor4 {
    let data = standard_normal(c_out * c_in * k * k, seed);
    RealTensor4::new((c_out, c_in, k, k), data).expect("finite gaussian entries")
}

/// Cheap seed mixer for deriving per-instance seeds from a base seed
/// (splitmix64 step).
pub fn mix_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
