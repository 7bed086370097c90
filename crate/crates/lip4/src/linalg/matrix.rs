use num_complex::Complex64;

use super::LinalgError;

/// Dense p x q complex matrix, row-major storage.
///
/// Immutable after construction; all operations return fresh matrices, so
/// values can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting shape/length
    /// mismatches and non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(LinalgError::BadLength {
                rows,
                cols,
                len: entries.len(),
            });
        }
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Internal constructor for values produced by finite arithmetic.
    pub(crate) fn from_parts(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        debug_assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self, LinalgError> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Dense product, plain triple loop in ikj order.
    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::ShapeMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let (p, m, q) = (self.rows, self.cols, other.cols);
        let mut out = vec![Complex64::new(0.0, 0.0); p * q];
        for i in 0..p {
            for k in 0..m {
                let a = self.entries[i * m + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &other.entries[k * q..(k + 1) * q];
                let dst = &mut out[i * q..(i + 1) * q];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(ComplexMatrix::from_parts(p, q, out))
    }

    /// `self* self`, computed without forming the transpose and exploiting
    /// the Hermitian symmetry of the result.
    pub fn gram_of(&self) -> ComplexMatrix {
        let (p, q) = (self.rows, self.cols);
        let mut out = vec![Complex64::new(0.0, 0.0); q * q];
        for r in 0..p {
            let row = &self.entries[r * q..(r + 1) * q];
            for i in 0..q {
                let x = row[i].conj();
                if x.re == 0.0 && x.im == 0.0 {
                    continue;
                }
                let dst = &mut out[i * q..(i + 1) * q];
                for j in i..q {
                    dst[j] += x * row[j];
                }
            }
        }
        for i in 0..q {
            for j in 0..i {
                out[i * q + j] = out[j * q + i].conj();
            }
        }
        ComplexMatrix::from_parts(q, q, out)
    }

    /// Conjugate transpose: `(a*)_{ij} = conj(a_{ji})`.
    pub fn conj_transpose(&self) -> ComplexMatrix {
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c * self.rows + r] = self.entries[r * self.cols + c].conj();
            }
        }
        ComplexMatrix::from_parts(self.cols, self.rows, out)
    }

    /// Square root of the sum of squared moduli (Schatten-2 norm).
    ///
    /// Falls back to max-scaled accumulation when the plain sum of squares
    /// overflows or underflows, so norms are exact across the full f64
    /// exponent range.
    pub fn frobenius_norm(&self) -> f64 {
        let sum: f64 = self
            .entries
            .iter()
            .map(|z| z.re * z.re + z.im * z.im)
            .sum();
        if sum.is_finite() && sum > 0.0 {
            return sum.sqrt();
        }
        let max = self
            .entries
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0f64, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .entries
            .iter()
            .map(|z| {
                let re = z.re / max;
                let im = z.im / max;
                re * re + im * im
            })
            .sum();
        max * sum.sqrt()
    }

    pub fn scale(&self, factor: f64) -> ComplexMatrix {
        ComplexMatrix::from_parts(
            self.rows,
            self.cols,
            self.entries.iter().map(|&z| z * factor).collect(),
        )
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if self.shape() != other.shape() {
            return Err(LinalgError::ShapeMismatch {
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(ComplexMatrix::from_parts(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    /// `self * v` for a column vector of length `cols`.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "matvec length mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.entries[r * self.cols..(r + 1) * self.cols];
            *o = row.iter().zip(v).map(|(&a, &x)| a * x).sum();
        }
        out
    }

    /// `self* * v` for a column vector of length `rows`, without forming the
    /// conjugate transpose.
    pub fn adjoint_matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.rows, "adjoint matvec length mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, &x) in v.iter().enumerate() {
            let row = &self.entries[r * self.cols..(r + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a.conj() * x;
            }
        }
        out
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }
}

pub(crate) fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter()
        .map(|z| z.re * z.re + z.im * z.im)
        .sum::<f64>()
        .sqrt()
}
