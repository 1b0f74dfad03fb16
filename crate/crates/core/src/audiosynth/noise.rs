//! Environment noise: ambient bed plus scripted nuisance events.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientSpectrum {
    White,
    Pink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseEventKind {
    SpeechBurst,
    Gust,
    Transient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseEvent {
    pub kind: NoiseEventKind,
    pub start: f64,
    pub duration: f64,
    /// RMS over the event span.
    pub level: f64,
    /// Restrict the event to one microphone; `None` reaches every channel.
    #[serde(default)]
    pub mic: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub ambient_level: f64,
    pub ambient_spectrum: AmbientSpectrum,
    #[serde(default)]
    pub events: Vec<NoiseEvent>,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            ambient_level: 0.006,
            ambient_spectrum: AmbientSpectrum::Pink,
            events: Vec::new(),
        }
    }
}

impl NoiseSpec {
    pub fn silent() -> Self {
        Self {
            ambient_level: 0.0,
            ambient_spectrum: AmbientSpectrum::White,
            events: Vec::new(),
        }
    }

    /// Ambient bed plus Poisson-scattered speech, gusts and clicks.
    pub fn random(seed: u64, duration: f64, mic_ids: &[u32]) -> Self {
        let mut r = rng::stream(seed, &[rng::tag("noise-spec")]);
        let minutes = duration / 60.0;
        let mut events = Vec::new();
        let mut draw = |r: &mut rand_chacha::ChaCha8Rng, kind, per_min: f64, dur: (f64, f64), lvl: (f64, f64), local: bool| {
            let n = if per_min * minutes > 0.0 {
                Poisson::new(per_min * minutes).map(|p| p.sample(r) as usize).unwrap_or(0)
            } else {
                0
            };
            for _ in 0..n {
                let d = r.random_range(dur.0..dur.1).min(duration);
                let start = r.random_range(0.0..=(duration - d).max(0.0));
                let mic = (local && !mic_ids.is_empty()).then(|| mic_ids[r.random_range(0..mic_ids.len())]);
                events.push(NoiseEvent {
                    kind,
                    start,
                    duration: d,
                    level: r.random_range(lvl.0..lvl.1),
                    mic,
                });
            }
        };
        draw(&mut r, NoiseEventKind::SpeechBurst, 1.0, (1.0, 4.0), (0.01, 0.04), true);
        draw(&mut r, NoiseEventKind::Gust, 0.4, (2.0, 8.0), (0.01, 0.03), false);
        draw(&mut r, NoiseEventKind::Transient, 0.8, (0.1, 0.5), (0.03, 0.15), true);
        events.sort_by(|a, b| a.start.total_cmp(&b.start));
        Self {
            ambient_level: r.random_range(0.003..0.01),
            ambient_spectrum: if r.random_bool(0.5) { AmbientSpectrum::Pink } else { AmbientSpectrum::White },
            events,
        }
    }

    pub fn validate(&self, duration: f64) -> Result<()> {
        if !(self.ambient_level >= 0.0 && self.ambient_level.is_finite()) {
            return Err(Error::config("ambient_level must be >= 0"));
        }
        for (i, e) in self.events.iter().enumerate() {
            if !(e.level >= 0.0 && e.level.is_finite()) {
                return Err(Error::config(format!("noise event {i}: level must be >= 0")));
            }
            if !(e.duration > 0.0 && e.start >= 0.0 && e.start + e.duration <= duration + 1e-9) {
                return Err(Error::config(format!(
                    "noise event {i}: interval [{}, {}] outside scenario duration {duration}",
                    e.start,
                    e.start + e.duration
                )));
            }
        }
        Ok(())
    }
}

/// RBJ biquad, transposed direct form II.
#[derive(Debug, Clone)]
pub(crate) struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    z1: f64,
    z2: f64,
}

impl Biquad {
    fn from_coeffs(b: [f64; 3], a: [f64; 3]) -> Self {
        Self {
            b0: b[0] / a[0],
            b1: b[1] / a[0],
            b2: b[2] / a[0],
            a1: a[1] / a[0],
            a2: a[2] / a[0],
            z1: 0.0,
            z2: 0.0,
        }
    }

    pub(crate) fn lowpass(fc: f64, sr: f64) -> Self {
        let w = TAU * fc / sr;
        let alpha = w.sin() / (2.0 * std::f64::consts::FRAC_1_SQRT_2);
        let c = w.cos();
        Self::from_coeffs(
            [(1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0],
            [1.0 + alpha, -2.0 * c, 1.0 - alpha],
        )
    }

    pub(crate) fn highpass(fc: f64, sr: f64) -> Self {
        let w = TAU * fc / sr;
        let alpha = w.sin() / (2.0 * std::f64::consts::FRAC_1_SQRT_2);
        let c = w.cos();
        Self::from_coeffs(
            [(1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0],
            [1.0 + alpha, -2.0 * c, 1.0 - alpha],
        )
    }

    pub(crate) fn process(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.z1;
        self.z1 = self.b1 * x - self.a1 * y + self.z2;
        self.z2 = self.b2 * x - self.a2 * y;
        y
    }
}

fn scale_to_rms(x: &mut [f64], level: f64) {
    let rms = (x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64).sqrt();
    let k = if rms > 0.0 { level / rms } else { 0.0 };
    x.iter_mut().for_each(|v| *v *= k);
}

/// Adds channel `channel`'s environment noise into `buf`.
pub fn add_noise(buf: &mut [f64], noise: &NoiseSpec, channel: usize, mic_id: u32, sr: u32, seed: u64) {
    let srf = sr as f64;
    if noise.ambient_level > 0.0 && !buf.is_empty() {
        let mut r = rng::stream(seed, &[rng::tag("ambient"), channel as u64]);
        let mut bed: Vec<f64> = (0..buf.len()).map(|_| r.sample(StandardNormal)).collect();
        if noise.ambient_spectrum == AmbientSpectrum::Pink {
            pinken(&mut bed);
        }
        scale_to_rms(&mut bed, noise.ambient_level);
        buf.iter_mut().zip(&bed).for_each(|(b, v)| *b += v);
    }
    for (i, e) in noise.events.iter().enumerate() {
        if e.mic.is_some_and(|m| m != mic_id) || e.level == 0.0 {
            continue;
        }
        let start = ((e.start * srf).round() as usize).min(buf.len());
        let end = (((e.start + e.duration) * srf).round() as usize).min(buf.len());
        if end <= start {
            continue;
        }
        let mut r = rng::stream(seed, &[rng::tag("event"), i as u64, channel as u64]);
        let mut x = render_event(e.kind, end - start, srf, &mut r);
        scale_to_rms(&mut x, e.level);
        buf[start..end].iter_mut().zip(&x).for_each(|(b, v)| *b += v);
    }
}

fn render_event<R: Rng>(kind: NoiseEventKind, n: usize, sr: f64, r: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let fade = ((0.05 * sr) as usize).min(n / 2).max(1);
    match kind {
        NoiseEventKind::SpeechBurst => {
            let mut hp = Biquad::highpass(300.0, sr);
            let mut lp = Biquad::lowpass(3000.0, sr);
            let syll = r.random_range(3.0..6.0);
            let ph = r.random_range(0.0..TAU);
            for (i, v) in x.iter_mut().enumerate() {
                let t = i as f64 / sr;
                let env = 0.5 * (1.0 + (TAU * syll * t + ph).sin());
                *v = lp.process(hp.process(*v)) * env;
            }
            apply_fades(&mut x, fade);
        }
        NoiseEventKind::Gust => {
            let mut lp1 = Biquad::lowpass(200.0, sr);
            let mut lp2 = Biquad::lowpass(200.0, sr);
            for (i, v) in x.iter_mut().enumerate() {
                let env = (PI * i as f64 / n as f64).sin().powi(2);
                *v = lp2.process(lp1.process(*v)) * env;
            }
        }
        NoiseEventKind::Transient => {
            let tau = (n as f64 / 5.0).max(1.0);
            for (i, v) in x.iter_mut().enumerate() {
                *v *= (-(i as f64) / tau).exp();
            }
        }
    }
    x
}

fn apply_fades(x: &mut [f64], fade: usize) {
    let n = x.len();
    for i in 0..fade.min(n) {
        let g = i as f64 / fade as f64;
        x[i] *= g;
        x[n - 1 - i] *= g;
    }
}

/// Paul Kellet's pink filter (about -3 dB/octave above 10 Hz at 48 kHz).
fn pinken(x: &mut [f64]) {
    let mut b = [0.0f64; 7];
    for v in x.iter_mut() {
        let w = *v;
        b[0] = 0.99886 * b[0] + w * 0.0555179;
        b[1] = 0.99332 * b[1] + w * 0.0750759;
        b[2] = 0.96900 * b[2] + w * 0.1538520;
        b[3] = 0.86650 * b[3] + w * 0.3104856;
        b[4] = 0.55000 * b[4] + w * 0.5329522;
        b[5] = -0.7616 * b[5] - w * 0.0168980;
        let out = b[0] + b[1] + b[2] + b[3] + b[4] + b[5] + b[6] + w * 0.5362;
        b[6] = w * 0.115926;
        *v = out;
    }
}
