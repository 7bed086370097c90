//! LIPK weight container.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic   4 bytes  "LIPK"
//! version u16      currently 1
//! c_out   u32
//! c_in    u32
//! kh      u32
//! kw      u32
//! entries f64 x (c_out * c_in * kh * kw), row-major
//! ```
//!
//! Dense matrices use the same container with `kh = kw = 1`. Write/read
//! round-trips are bit-exact.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::linalg::{ComplexMatrix, RealTensor4};

pub const MAGIC: [u8; 4] = *b"LIPK";
pub const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum LipkError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes {0:?}; not a LIPK file")]
    BadMagic([u8; 4]),
    #[error("unsupported LIPK version {0}")]
    UnsupportedVersion(u16),
    #[error("file truncated: expected {expected} bytes of payload, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("declared dims {dims:?} are invalid")]
    BadDims { dims: (u32, u32, u32, u32) },
    #[error("entries must be finite")]
    NonFinite,
}

pub fn to_bytes(tensor: &RealTensor4) -> Vec<u8> {
    let (c_out, c_in, kh, kw) = tensor.dims();
    let mut out = Vec::with_capacity(22 + tensor.entries().len() * 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for dim in [c_out, c_in, kh, kw] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for &x in tensor.entries() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<RealTensor4, LipkError> {
    if bytes.len() < 22 {
        return Err(LipkError::Truncated {
            expected: 22,
            got: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("length checked");
    if magic != MAGIC {
        return Err(LipkError::BadMagic(magic));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().expect("length checked"));
    if version != VERSION {
        return Err(LipkError::UnsupportedVersion(version));
    }
    let mut dims = [0u32; 4];
    for (i, d) in dims.iter_mut().enumerate() {
        let at = 6 + 4 * i;
        *d = u32::from_le_bytes(bytes[at..at + 4].try_into().expect("length checked"));
    }
    let dims = (dims[0], dims[1], dims[2], dims[3]);
    if dims.0 == 0 || dims.1 == 0 || dims.2 == 0 || dims.3 == 0 {
        return Err(LipkError::BadDims { dims });
    }
    let count = dims.0 as usize * dims.1 as usize * dims.2 as usize * dims.3 as usize;
    let payload = &bytes[22..];
    if payload.len() != count * 8 {
        return Err(LipkError::Truncated {
            expected: count * 8,
            got: payload.len(),
        });
    }
    let entries: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    RealTensor4::new(
        (dims.0 as usize, dims.1 as usize, dims.2 as usize, dims.3 as usize),
        entries,
    )
    .map_err(|_| LipkError::NonFinite)
}

pub fn write_tensor(path: &Path, tensor: &RealTensor4) -> Result<(), LipkError> {
    fs::write(path, to_bytes(tensor))?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<RealTensor4, LipkError> {
    from_bytes(&fs::read(path)?)
}

/// Reads a dense matrix stored with `kh = kw = 1` semantics.
pub fn read_matrix(path: &Path) -> Result<ComplexMatrix, LipkError> {
    let tensor = read_tensor(path)?;
    let (c_out, c_in, kh, kw) = tensor.dims();
    if kh != 1 || kw != 1 {
        return Err(LipkError::BadDims {
            dims: (c_out as u32, c_in as u32, kh as u32, kw as u32),
        });
    }
    Ok(ComplexMatrix::from_real(c_out, c_in, tensor.entries()).expect("finite by construction"))
}

/// Stores a real matrix as a `rows x cols x 1 x 1` tensor.
pub fn matrix_to_tensor(rows: usize, cols: usize, entries: &[f64]) -> RealTensor4 {
    RealTensor4::new((rows, cols, 1, 1), entries.to_vec()).expect("caller provides finite entries")
}
