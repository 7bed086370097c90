//! Unnormalized forward 2-D DFT.
//!
//! Convention: `Y[u][v] = sum_{a,b} x[a][b] exp(-2*pi*i*(u*a + v*b)/n)`,
//! i.e. negative exponent, no normalization; the inverse would be `(1/n) U*`
//! per axis. Every downstream frequency-domain computation in this crate
//! assumes this convention.

use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError};

/// Forward 2-D DFT of `x`, applied per row and then per column.
///
/// Composite sizes use a mixed-radix Cooley-Tukey decomposition; prime sizes
/// fall back to direct O(n^2) summation per axis, which is fine at the
/// desk-scale sizes this crate targets (n <= 256 or so).
pub fn dft2(x: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let (rows, cols) = x.shape();
    if rows == 0 || cols == 0 {
        return Err(LinalgError::EmptyMatrix);
    }

    let row_table = twiddle_table(cols);
    let col_table = if rows == cols {
        None
    } else {
        Some(twiddle_table(rows))
    };

    // Transform rows.
    let mut inter = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let row: Vec<Complex64> = (0..cols).map(|c| x.get(r, c)).collect();
        inter.extend(fft(&row, &row_table, 1));
    }

    // Transform columns.
    let table = col_table.as_ref().unwrap_or(&row_table);
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for c in 0..cols {
        let col: Vec<Complex64> = (0..rows).map(|r| inter[r * cols + c]).collect();
        for (r, v) in fft(&col, table, 1).into_iter().enumerate() {
            out[r * cols + c] = v;
        }
    }

    Ok(ComplexMatrix::from_parts(rows, cols, out))
}

/// 2-D DFT of a real `k x k` block zero-padded to `n x n`, anchored at the
/// index origin. Only the `k` populated rows go through the row pass, which
/// is most of the work saved when transforming small filters on large grids.
pub(crate) fn dft2_padded_real(block: &[f64], k: usize, n: usize) -> ComplexMatrix {
    debug_assert_eq!(block.len(), k * k);
    debug_assert!(k <= n && n > 0);
    let zero = Complex64::new(0.0, 0.0);
    let table = twiddle_table(n);

    let mut inter = Vec::with_capacity(k * n);
    let mut buf = vec![zero; n];
    for a in 0..k {
        buf.fill(zero);
        for b in 0..k {
            buf[b] = Complex64::new(block[a * k + b], 0.0);
        }
        inter.extend(fft(&buf, &table, 1));
    }

    let mut out = vec![zero; n * n];
    for v in 0..n {
        buf.fill(zero);
        for a in 0..k {
            buf[a] = inter[a * n + v];
        }
        for (u, value) in fft(&buf, &table, 1).into_iter().enumerate() {
            out[u * n + v] = value;
        }
    }
    ComplexMatrix::from_parts(n, n, out)
}

/// `exp(-2*pi*i*t/n)` for `t` in `0..n`, computed from the angle directly so
/// accuracy does not degrade with repeated multiplication.
fn twiddle_table(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|t| {
            let angle = -2.0 * std::f64::consts::PI * t as f64 / n as f64;
            Complex64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// FFT dispatch. `table` is the twiddle table of the root size; the
/// transform size at this level is `table.len() / stride` and
/// `w_n^t = table[t * stride]`.
fn fft(input: &[Complex64], table: &[Complex64], stride: usize) -> Vec<Complex64> {
    let n = input.len();
    if n.is_power_of_two() {
        let mut buf = input.to_vec();
        fft_pow2_in_place(&mut buf, table, stride);
        return buf;
    }
    fft_mixed(input, table, stride)
}

/// Iterative radix-2 with bit-reversal permutation; no allocation beyond the
/// caller's buffer.
fn fft_pow2_in_place(buf: &mut [Complex64], table: &[Complex64], stride: usize) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    let shift = n.leading_zeros() + 1;
    for i in 0..n {
        let j = i.reverse_bits() >> shift;
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let twiddle_step = (n / len) * stride;
        for start in (0..n).step_by(len) {
            for off in 0..len / 2 {
                let w = table[off * twiddle_step];
                let a = buf[start + off];
                let b = buf[start + off + len / 2] * w;
                buf[start + off] = a + b;
                buf[start + off + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

/// Recursive mixed-radix decimation for sizes with odd factors.
fn fft_mixed(input: &[Complex64], table: &[Complex64], stride: usize) -> Vec<Complex64> {
    let n = input.len();
    debug_assert_eq!(n * stride, table.len());
    if n == 1 {
        return input.to_vec();
    }
    let p = smallest_prime_factor(n);
    if p == n {
        return dft_direct(input, table, stride);
    }
    let m = n / p;

    // Decimate in time: p interleaved sub-sequences of length m.
    let subs: Vec<Vec<Complex64>> = (0..p)
        .map(|j| {
            let sub: Vec<Complex64> = (0..m).map(|i| input[i * p + j]).collect();
            fft(&sub, table, stride * p)
        })
        .collect();

    // Combine: X[k1 + m*k2] = sum_j w_n^{j*(k1 + m*k2)} F_j[k1].
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for k1 in 0..m {
        for k2 in 0..p {
            let k = k1 + m * k2;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, sub) in subs.iter().enumerate() {
                acc += table[(j * k) % n * stride] * sub[k1];
            }
            out[k] = acc;
        }
    }
    out
}

fn dft_direct(input: &[Complex64], table: &[Complex64], stride: usize) -> Vec<Complex64> {
    let n = input.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &x) in input.iter().enumerate() {
                acc += table[(j * k) % n * stride] * x;
            }
            acc
        })
        .collect()
}

fn smallest_prime_factor(n: usize) -> usize {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut f = 3;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return f;
        }
        f += 2;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    /// Independent O(n^4) reference, direct double summation.
    pub(crate) fn naive_dft2(x: &ComplexMatrix) -> ComplexMatrix {
        let (rows, cols) = x.shape();
        let mut out = ComplexMatrix::zeros(rows, cols);
        for u in 0..rows {
            for v in 0..cols {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..rows {
                    for b in 0..cols {
                        let angle = -2.0 * std::f64::consts::PI
                            * (u as f64 * a as f64 / rows as f64
                                + v as f64 * b as f64 / cols as f64);
                        acc += x.get(a, b) * Complex64::new(angle.cos(), angle.sin());
                    }
                }
                out.set(u, v, acc);
            }
        }
        out
    }

    #[test]
    fn impulse_transforms_to_all_ones() {
        let mut x = ComplexMatrix::zeros(4, 4);
        x.set(0, 0, Complex64::new(1.0, 0.0));
        let y = dft2(&x).unwrap();
        for u in 0..4 {
            for v in 0..4 {
                assert!((y.get(u, v) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_matrix_is_dc_only() {
        let c = 2.5;
        let x = ComplexMatrix::from_real(4, 4, &[c; 16]).unwrap();
        let y = dft2(&x).unwrap();
        assert!((y.get(0, 0) - Complex64::new(16.0 * c, 0.0)).norm() < 1e-12);
        for u in 0..4 {
            for v in 0..4 {
                if (u, v) != (0, 0) {
                    assert!(y.get(u, v).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn matches_naive_reference_on_random_input() {
        let x = synth::gaussian_complex_matrix(6, 6, 42);
        let fast = dft2(&x).unwrap();
        let slow = naive_dft2(&x);
        let scale = slow.frobenius_norm();
        assert!(fast.sub(&slow).unwrap().frobenius_norm() <= 1e-10 * scale);
    }

    #[test]
    fn prime_and_composite_sizes_agree_with_naive() {
        for n in [2usize, 3, 5, 7, 8, 9, 12, 13, 16, 15] {
            let x = synth::gaussian_complex_matrix(n, n, 100 + n as u64);
            let fast = dft2(&x).unwrap();
            let slow = naive_dft2(&x);
            let scale = slow.frobenius_norm().max(1.0);
            assert!(
                fast.sub(&slow).unwrap().frobenius_norm() <= 1e-10 * scale,
                "size {n} diverges from the direct summation"
            );
        }
    }

    #[test]
    fn rectangular_support_also_matches_naive() {
        let x = synth::gaussian_complex_matrix(4, 6, 55);
        let fast = dft2(&x).unwrap();
        let slow = naive_dft2(&x);
        let scale = slow.frobenius_norm();
        assert!(fast.sub(&slow).unwrap().frobenius_norm() <= 1e-10 * scale);
    }

    #[test]
    fn parseval_unnormalized() {
        for n in [3usize, 4, 6, 10] {
            let x = synth::gaussian_complex_matrix(n, n, 7 * n as u64);
            let y = dft2(&x).unwrap();
            let lhs = y.frobenius_norm();
            let rhs = n as f64 * x.frobenius_norm();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        }
    }
}
