//! Binary model files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                     |
//! |--------|------|---------------------------|
//! | 0      | 4    | magic `STNM`              |
//! | 4      | 4    | version (u32)             |
//! | 8      | 8    | h (u64)                   |
//! | 16     | 8    | k (u64)                   |
//! | 24     | 8    | α (f64)                   |
//! | 32     | 8    | β (f64)                   |
//! | 40     | 8hk  | Θ, column-major (f64)     |

use std::fs;
use std::io::Write;
use std::path::Path;

use sptrace_core::{Matrix, RegPair};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"STNM";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 40;

/// A fitted coefficient matrix and the weights it was fitted with.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub theta: Matrix,
    pub reg: RegPair,
}

pub fn encode(model: &Model) -> Vec<u8> {
    let (h, k) = model.theta.shape();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * h * k);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(h as u64).to_le_bytes());
    out.extend_from_slice(&(k as u64).to_le_bytes());
    out.extend_from_slice(&model.reg.alpha.to_le_bytes());
    out.extend_from_slice(&model.reg.beta.to_le_bytes());
    for x in model.theta.iter() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

fn take<const N: usize>(bytes: &[u8], at: usize) -> [u8; N] {
    bytes[at..at + N].try_into().expect("length checked by caller")
}

pub fn decode(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            needed: HEADER_LEN,
            got: bytes.len(),
        });
    }
    let magic: [u8; 4] = take(bytes, 0);
    if magic != MAGIC {
        return Err(Error::BadMagic {
            expected: MAGIC,
            found: magic,
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            needed: HEADER_LEN,
            got: bytes.len(),
        });
    }
    let version = u32::from_le_bytes(take(bytes, 4));
    if version != VERSION {
        return Err(Error::Version {
            found: version,
            supported: VERSION,
        });
    }
    let h = u64::from_le_bytes(take(bytes, 8));
    let k = u64::from_le_bytes(take(bytes, 16));
    let alpha = f64::from_le_bytes(take(bytes, 24));
    let beta = f64::from_le_bytes(take(bytes, 32));
    let needed = h
        .checked_mul(k)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(HEADER_LEN as u64))
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::Format(format!("dimensions {h} x {k} are too large")))?;
    if bytes.len() < needed {
        return Err(Error::Truncated {
            needed,
            got: bytes.len(),
        });
    }
    if bytes.len() > needed {
        return Err(Error::Format(format!(
            "{} trailing bytes after the payload",
            bytes.len() - needed
        )));
    }
    let (h, k) = (h as usize, k as usize);
    let mut values = Vec::with_capacity(h * k);
    for i in 0..h * k {
        values.push(f64::from_le_bytes(take(bytes, HEADER_LEN + 8 * i)));
    }
    let reg = RegPair::new(alpha, beta).map_err(|e| Error::Format(e.to_string()))?;
    Ok(Model {
        theta: Matrix::from_vec(h, k, values),
        reg,
    })
}

pub fn save_model(path: &Path, model: &Model) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| e.in_file(path))
}
