//! Feature matrices on disk: `IVDF`, rows and columns as little-endian u32,
//! then the values as little-endian f64 in row-major order.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"IVDF";

pub fn encode_features(x: &Array2<f64>) -> Vec<u8> {
    let (r, c) = x.dim();
    let mut out = Vec::with_capacity(12 + 8 * r * c);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(r as u32).to_le_bytes());
    out.extend_from_slice(&(c as u32).to_le_bytes());
    for v in x.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_features(bytes: &[u8]) -> Result<Array2<f64>> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(Error::data("not a feature matrix (bad magic)"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (r, c) = (word(4), word(8));
    let body = &bytes[12..];
    if body.len() != 8 * r * c {
        return Err(Error::data(format!("feature matrix {r}x{c} needs {} bytes, got {}", 8 * r * c, body.len())));
    }
    let vals = body
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    Array2::from_shape_vec((r, c), vals).map_err(|e| Error::data(e.to_string()))
}

pub fn read_features(path: &Path) -> Result<Array2<f64>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_features(&bytes).map_err(|e| Error::data(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let x = Array2::from_shape_fn((3, 5), |(i, j)| (i as f64 - 1.3) * (j as f64 + 0.1).ln());
        let b = encode_features(&x);
        assert_eq!(b.len(), 12 + 8 * 15);
        assert_eq!(decode_features(&b).unwrap(), x);
        assert!(decode_features(&b[..b.len() - 1]).is_err());
        assert!(decode_features(b"nope").is_err());
        let empty = Array2::<f64>::zeros((0, 4));
        assert_eq!(decode_features(&encode_features(&empty)).unwrap().dim(), (0, 4));
    }
}
