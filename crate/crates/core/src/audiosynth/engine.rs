use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Harmonic idle-engine model: `n_harmonics` partials at multiples of the
/// firing frequency with a dB/octave rolloff and slow amplitude modulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineSoundParams {
    /// Firing frequency (Hz).
    pub f0: f64,
    pub n_harmonics: u32,
    /// dB per octave.
    pub harmonic_rolloff: f64,
    /// RMS at the 1 m reference distance.
    pub amplitude: f64,
    pub am_depth: f64,
    pub am_rate: f64,
}

impl Default for EngineSoundParams {
    fn default() -> Self {
        Self {
            f0: 30.0,
            n_harmonics: 24,
            harmonic_rolloff: 4.5,
            amplitude: 0.09,
            am_depth: 0.15,
            am_rate: 0.8,
        }
    }
}

impl EngineSoundParams {
    /// The partial stack reaches 1.5 to 3.5 kHz whatever the firing rate, so
    /// valve and injector noise shows up above the lowest spectral bands.
    pub fn random<R: Rng + ?Sized>(r: &mut R) -> Self {
        let f0: f64 = r.random_range(20.0..45.0);
        let top: f64 = r.random_range(1500.0..3500.0);
        Self {
            f0,
            n_harmonics: (top / f0).ceil() as u32,
            harmonic_rolloff: r.random_range(2.5..5.0),
            amplitude: r.random_range(0.07..0.10),
            am_depth: r.random_range(0.05..0.3),
            am_rate: r.random_range(0.2..2.0),
        }
    }

    pub fn validate(&self, sr: u32) -> Result<()> {
        if !(self.f0 > 0.0 && self.f0.is_finite()) {
            return Err(Error::config("engine f0 must be > 0"));
        }
        if self.n_harmonics < 1 {
            return Err(Error::config("engine n_harmonics must be >= 1"));
        }
        let top = self.f0 * self.n_harmonics as f64;
        if top >= sr as f64 / 2.0 {
            return Err(Error::config(format!(
                "engine harmonics alias: f0 * n_harmonics = {top} Hz >= Nyquist {} Hz",
                sr / 2
            )));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::config("engine amplitude must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.am_depth) {
            return Err(Error::config("engine am_depth must be in [0, 1)"));
        }
        if !(self.am_rate >= 0.0 && self.am_rate.is_finite() && self.harmonic_rolloff.is_finite()) {
            return Err(Error::config("engine am_rate/harmonic_rolloff must be finite, am_rate >= 0"));
        }
        Ok(())
    }

    /// Linear gain of harmonic `k` (1-based) relative to the fundamental.
    pub fn harmonic_gain(&self, k: u32) -> f64 {
        10f64.powf(-self.harmonic_rolloff * (k as f64).log2() / 20.0)
    }
}

const TABLE_BITS: u32 = 13;
const TABLE_LEN: usize = 1 << TABLE_BITS;

/// Renders `ceil(duration * sr)` samples of engine sound with RMS equal to
/// `params.amplitude`.
pub fn synth_engine(params: &EngineSoundParams, duration: f64, sr: u32, seed: u64) -> Result<Vec<f32>> {
    params.validate(sr)?;
    let n = (duration * sr as f64).ceil().max(0.0) as usize;
    if params.amplitude == 0.0 || n == 0 {
        return Ok(vec![0.0; n]);
    }
    let mut r = rng::stream(seed, &[rng::tag("engine")]);
    let phases: Vec<f64> = (0..params.n_harmonics).map(|_| r.random_range(0.0..TAU)).collect();
    let am_phase = r.random_range(0.0..TAU);

    // one period of the harmonic stack, read back with linear interpolation
    let mut table = vec![0.0f64; TABLE_LEN + 1];
    for (i, slot) in table.iter_mut().enumerate().take(TABLE_LEN) {
        let x = TAU * i as f64 / TABLE_LEN as f64;
        *slot = (1..=params.n_harmonics)
            .zip(&phases)
            .map(|(k, ph)| params.harmonic_gain(k) * (k as f64 * x + ph).sin())
            .sum();
    }
    table[TABLE_LEN] = table[0];

    let step = params.f0 / sr as f64;
    let am_step = TAU * params.am_rate / sr as f64;
    let mut out = Vec::with_capacity(n);
    let mut phase = 0.0f64;
    let mut sum_sq = 0.0f64;
    for i in 0..n {
        let pos = phase * TABLE_LEN as f64;
        let idx = pos as usize;
        let frac = pos - idx as f64;
        let carrier = table[idx] + frac * (table[idx + 1] - table[idx]);
        let am = 1.0 + params.am_depth * (am_step * i as f64 + am_phase).sin();
        let s = carrier * am;
        sum_sq += s * s;
        out.push(s as f32);
        phase += step;
        if phase >= 1.0 {
            phase -= 1.0;
        }
    }
    let rms = (sum_sq / n as f64).sqrt();
    if rms > 0.0 {
        let scale = params.amplitude / rms;
        for s in &mut out {
            *s = (*s as f64 * scale) as f32;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rms(x: &[f32]) -> f64 {
        (x.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
    }

    /// Magnitude of the correlation with a complex exponential at `freq`.
    fn tone_magnitude(x: &[f32], freq: f64, sr: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (n, &v) in x.iter().enumerate() {
            let a = TAU * freq * n as f64 / sr;
            re += v as f64 * a.cos();
            im -= v as f64 * a.sin();
        }
        re.hypot(im)
    }

    #[test]
    fn rms_matches_amplitude() {
        let p = EngineSoundParams::default();
        let x = synth_engine(&p, 2.0, 48_000, 5).unwrap();
        assert_eq!(x.len(), 96_000);
        assert!((rms(&x) - p.amplitude).abs() / p.amplitude < 0.05);
    }

    #[test]
    fn zero_amplitude_is_silent() {
        let p = EngineSoundParams {
            amplitude: 0.0,
            ..Default::default()
        };
        assert!(synth_engine(&p, 0.5, 48_000, 1).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_tone_peaks_at_f0() {
        let p = EngineSoundParams {
            f0: 30.0,
            n_harmonics: 1,
            am_depth: 0.0,
            ..Default::default()
        };
        let x = synth_engine(&p, 1.0, 48_000, 2).unwrap();
        let at_f0 = tone_magnitude(&x, 30.0, 48_000.0);
        for off in [20.0, 45.0, 60.0, 90.0] {
            assert!(tone_magnitude(&x, off, 48_000.0) < 1e-3 * at_f0);
        }
    }

    #[test]
    fn harmonics_follow_one_over_k_at_six_db_per_octave() {
        let p = EngineSoundParams {
            f0: 30.0,
            n_harmonics: 10,
            harmonic_rolloff: 6.0,
            am_depth: 0.0,
            ..Default::default()
        };
        // 1 s holds exactly 30 periods, so every harmonic sits on a DFT bin
        let x = synth_engine(&p, 1.0, 48_000, 3).unwrap();
        let h1 = tone_magnitude(&x, 30.0, 48_000.0);
        for k in 2..=10 {
            let hk = tone_magnitude(&x, 30.0 * k as f64, 48_000.0);
            let ratio = hk / h1;
            assert!((ratio * k as f64 - 1.0).abs() < 0.02, "harmonic {k}: ratio {ratio}");
        }
    }

    #[test]
    fn aliasing_is_rejected() {
        let p = EngineSoundParams {
            f0: 1000.0,
            n_harmonics: 24,
            ..Default::default()
        };
        assert!(matches!(synth_engine(&p, 1.0, 48_000, 0), Err(Error::Config(_))));
    }
}
