//! Debug exports: raw `f32` matrices and grayscale PGM images.

use std::fs;
use std::path::Path;

use super::stft::{Spectrogram, StftConfig};
use crate::error::{Error, Result};

pub const SPECTROGRAM_MAGIC: [u8; 4] = *b"IVDS";

/// Layout: magic, `u32` T, `u32` F (little endian), then `T·F` little-endian
/// `f32` values row by row.
pub fn write_spectrogram_bin(path: &Path, spec: &Spectrogram) -> Result<()> {
    let mut bytes = Vec::with_capacity(12 + 4 * spec.mags.len());
    bytes.extend_from_slice(&SPECTROGRAM_MAGIC);
    bytes.extend_from_slice(&(spec.t_frames as u32).to_le_bytes());
    bytes.extend_from_slice(&(spec.f_bins as u32).to_le_bytes());
    for &v in &spec.mags {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a matrix written by [`write_spectrogram_bin`]. The STFT settings are
/// not stored, so the default configuration is attached.
pub fn read_spectrogram_bin(path: &Path) -> Result<Spectrogram> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 12 || bytes[..4] != SPECTROGRAM_MAGIC {
        return Err(Error::data(format!("{}: not a spectrogram file", path.display())));
    }
    let t = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let f = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() != 4 * t * f {
        return Err(Error::data(format!("{}: expected {} values", path.display(), t * f)));
    }
    let mags = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok(Spectrogram {
        mags,
        t_frames: t,
        f_bins: f,
        config: StftConfig::default(),
    })
}

/// Binary PGM with time on the x axis and low frequencies at the bottom,
/// min-max scaled to 0..=255.
pub fn spectrogram_to_pgm(spec: &Spectrogram) -> Vec<u8> {
    let (t, f) = spec.shape();
    let lo = spec.mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = spec.mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if hi > lo { hi - lo } else { 1.0 };
    let mut out = format!("P5\n{t} {f}\n255\n").into_bytes();
    for row in (0..f).rev() {
        for col in 0..t {
            let v = (spec.get(col, row) - lo) / range;
            out.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
        }
    }
    out
}
