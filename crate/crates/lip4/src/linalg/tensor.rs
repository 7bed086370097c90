use super::LinalgError;

/// Real 4-D tensor with dims `(c_out, c_in, kh, kw)`, row-major storage.
/// Carries convolutional filters before spatial padding.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTensor4 {
    dims: (usize, usize, usize, usize),
    entries: Vec<f64>,
}

impl RealTensor4 {
    pub fn new(dims: (usize, usize, usize, usize), entries: Vec<f64>) -> Result<Self, LinalgError> {
        let (a, b, c, d) = dims;
        if a == 0 || b == 0 || c == 0 || d == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        let len = a * b * c * d;
        if entries.len() != len {
            return Err(LinalgError::BadLength {
                rows: a * b,
                cols: c * d,
                len: entries.len(),
            });
        }
        if !entries.iter().all(|x| x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { dims, entries })
    }

    pub fn zeros(dims: (usize, usize, usize, usize)) -> Self {
        Self {
            dims,
            entries: vec![0.0; dims.0 * dims.1 * dims.2 * dims.3],
        }
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        self.dims
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, o: usize, i: usize, a: usize, b: usize) -> f64 {
        let (_, ci, kh, kw) = self.dims;
        self.entries[((o * ci + i) * kh + a) * kw + b]
    }

    #[inline]
    pub fn set(&mut self, o: usize, i: usize, a: usize, b: usize, v: f64) {
        let (_, ci, kh, kw) = self.dims;
        self.entries[((o * ci + i) * kh + a) * kw + b] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|&x| x == 0.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dims: self.dims,
            entries: self.entries.iter().map(|&x| x * factor).collect(),
        }
    }
}
