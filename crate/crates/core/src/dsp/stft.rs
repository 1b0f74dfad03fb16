use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hann,
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub n_fft: usize,
    pub hop: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            n_fft: 1024,
            hop: 512,
            window: WindowKind::Hann,
        }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.n_fft.is_power_of_two() || self.n_fft < 2 {
            return Err(Error::config(format!("n_fft must be a power of two >= 2, got {}", self.n_fft)));
        }
        if self.hop == 0 || self.hop > self.n_fft {
            return Err(Error::config(format!("hop must satisfy 0 < hop <= n_fft, got {}", self.hop)));
        }
        Ok(())
    }

    pub fn n_bins(&self) -> usize {
        self.n_fft / 2 + 1
    }

    /// Number of frames for a segment of `len` samples (`None` if shorter than `n_fft`).
    pub fn n_frames(&self, len: usize) -> Option<usize> {
        (len >= self.n_fft).then(|| 1 + (len - self.n_fft) / self.hop)
    }
}

/// Periodic window of length `n`.
pub fn window_coeffs(kind: WindowKind, n: usize) -> Vec<f64> {
    match kind {
        WindowKind::Rectangular => vec![1.0; n],
        WindowKind::Hann => (0..n).map(|i| 0.5 - 0.5 * (TAU * i as f64 / n as f64).cos()).collect(),
    }
}

/// Magnitude spectrogram, row-major `t_frames × f_bins`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub mags: Vec<f64>,
    pub t_frames: usize,
    pub f_bins: usize,
    pub config: StftConfig,
}

impl Spectrogram {
    pub fn get(&self, t: usize, f: usize) -> f64 {
        self.mags[t * self.f_bins + f]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.mags[t * self.f_bins..(t + 1) * self.f_bins]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.t_frames, self.f_bins)
    }
}

/// Reusable STFT engine (cached FFT plan and window).
#[derive(Clone)]
pub struct Stft {
    config: StftConfig,
    fft: Arc<dyn Fft<f64>>,
    window: Vec<f64>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft").field("config", &self.config).finish()
    }
}

impl Stft {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        let fft = FftPlanner::new().plan_fft_forward(config.n_fft);
        Ok(Self {
            config,
            fft,
            window: window_coeffs(config.window, config.n_fft),
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    fn frames<T: Copy + Into<f64>>(&self, segment: &[T], mut sink: impl FnMut(usize, &[Complex<f64>])) -> Result<usize> {
        let n = self.config.n_fft;
        let t_frames = self.config.n_frames(segment.len()).ok_or(Error::Size {
            needed: n,
            got: segment.len(),
        })?;
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for t in 0..t_frames {
            let frame = &segment[t * self.config.hop..t * self.config.hop + n];
            for ((b, &x), &w) in buf.iter_mut().zip(frame).zip(&self.window) {
                *b = Complex::new(x.into() * w, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            sink(t, &buf[..self.config.n_bins()]);
        }
        Ok(t_frames)
    }

    pub fn magnitude<T: Copy + Into<f64>>(&self, segment: &[T]) -> Result<Spectrogram> {
        let f_bins = self.config.n_bins();
        let mut mags = Vec::with_capacity(self.config.n_frames(segment.len()).unwrap_or(0) * f_bins);
        let t_frames = self.frames(segment, |_, row| mags.extend(row.iter().map(|c| c.norm())))?;
        Ok(Spectrogram {
            mags,
            t_frames,
            f_bins,
            config: self.config,
        })
    }

    /// One-sided complex spectra, one row per frame.
    pub fn complex<T: Copy + Into<f64>>(&self, segment: &[T]) -> Result<Vec<Vec<Complex<f64>>>> {
        let mut rows = Vec::new();
        self.frames(segment, |_, row| rows.push(row.to_vec()))?;
        Ok(rows)
    }
}

pub fn stft_magnitude<T: Copy + Into<f64>>(segment: &[T], config: &StftConfig) -> Result<Spectrogram> {
    Stft::new(*config)?.magnitude(segment)
}

pub fn stft_complex<T: Copy + Into<f64>>(segment: &[T], config: &StftConfig) -> Result<Vec<Vec<Complex<f64>>>> {
    Stft::new(*config)?.complex(segment)
}

/// `log(1 + x)` followed by zero-mean, unit-variance scaling over all
/// entries; constant input maps to all zeros.
pub fn normalize(spec: &Spectrogram) -> Spectrogram {
    let logged: Vec<f64> = spec.mags.iter().map(|&x| x.ln_1p()).collect();
    let n = logged.len().max(1) as f64;
    let mean = logged.iter().sum::<f64>() / n;
    let var = logged.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mags = if var <= 1e-24 {
        vec![0.0; logged.len()]
    } else {
        let sd = var.sqrt();
        logged.iter().map(|v| (v - mean) / sd).collect()
    };
    Spectrogram { mags, ..spec.clone() }
}
