use serde::{Deserialize, Serialize};

use super::cutout::{apply_cutout, CutoutModel};
use super::engine::synth_engine;
use super::noise::{add_noise, NoiseSpec};
use crate::error::{Error, Result};
use crate::rng;
use crate::scenesim::{MicPose, Powertrain, ScenarioSpec, VehicleTrack};
use crate::SAMPLE_RATE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MicPattern {
    Omni,
    /// Gain `(1 + cos θ) / 2` with θ measured from the capsule's facing direction.
    Cardioid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixOptions {
    pub pattern: MicPattern,
    /// Distance floor for the 1/d law, meters.
    pub d_min: f64,
}

impl Default for MixOptions {
    fn default() -> Self {
        Self {
            pattern: MicPattern::Cardioid,
            d_min: 0.5,
        }
    }
}

/// `n_channels` equally long mono tracks, normalised to [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelAudio {
    pub sr: u32,
    /// Microphone id recorded by each channel.
    pub mic_ids: Vec<u32>,
    pub channels: Vec<Vec<f32>>,
}

impl MultichannelAudio {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sr as f64
    }

    pub fn channel_of(&self, mic_id: u32) -> Option<usize> {
        self.mic_ids.iter().position(|&m| m == mic_id)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mic_ids.len() != self.channels.len() {
            return Err(Error::data("channel/mic id count mismatch"));
        }
        let n = self.len();
        if self.channels.iter().any(|c| c.len() != n) {
            return Err(Error::data("channels differ in length"));
        }
        if self.channels.iter().flatten().any(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(Error::data("samples must be finite and within [-1, 1]"));
        }
        Ok(())
    }
}

pub fn n_samples(duration: f64, sr: u32) -> usize {
    (duration * sr as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Engine signal of each vehicle (`None` for vehicles that never run an engine).
pub fn render_engine_sources(spec: &ScenarioSpec, seed: u64) -> Result<Vec<Option<Vec<f32>>>> {
    let sr = SAMPLE_RATE;
    spec.vehicles
        .iter()
        .map(|v| {
            let runs = v.powertrain == Powertrain::Combustion && v.engine_timeline.iter().any(|e| e.engine_on);
            if !runs {
                return Ok(None);
            }
            let params = v
                .engine_params
                .as_ref()
                .ok_or_else(|| Error::config(format!("vehicle {} has no engine_params", v.id)))?;
            let vseed = rng::key(seed, &[rng::tag("engine-source"), v.id as u64]);
            let mut s = synth_engine(params, spec.duration, sr, vseed)?;
            s.resize(n_samples(spec.duration, sr), 0.0);
            Ok(Some(s))
        })
        .collect()
}

/// Adds one vehicle's attenuated, engine-gated signal as heard by `mic`.
pub fn accumulate_source(buf: &mut [f64], v: &VehicleTrack, signal: &[f32], mic: &MicPose, opts: &MixOptions, sr: u32) {
    let path = &v.path;
    if path.len() < 2 || v.powertrain == Powertrain::Electric {
        return;
    }
    let srf = sr as f64;
    let (t0, t_end) = (path[0].t, path[path.len() - 1].t);
    let n_start = (t0 * srf).ceil().max(0.0) as usize;
    let n_stop = ((t_end * srf).floor() as usize + 1).min(buf.len()).min(signal.len());
    let (fx, fy) = mic.facing();
    let events = &v.engine_timeline;
    let mut seg = 0usize;
    let mut ev = 0usize;
    let mut on = false;
    for n in n_start..n_stop {
        let t = n as f64 / srf;
        while seg + 2 < path.len() && path[seg + 1].t <= t {
            seg += 1;
        }
        while ev < events.len() && events[ev].t <= t {
            on = events[ev].engine_on;
            ev += 1;
        }
        if !on {
            continue;
        }
        let (a, b) = (path[seg], path[seg + 1]);
        let s = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        let dx = a.x + s * (b.x - a.x) - mic.x;
        let dy = a.y + s * (b.y - a.y) - mic.y;
        let d = dx.hypot(dy);
        let mut gain = 1.0 / d.max(opts.d_min);
        if opts.pattern == MicPattern::Cardioid && d > 0.0 {
            gain *= 0.5 * (1.0 + (dx * fx + dy * fy) / d);
        }
        buf[n] += gain * signal[n] as f64;
    }
}

/// Channel `c` before the master limiter: sources, then noise, then cutouts.
pub fn mix_channel_prelimit(
    spec: &ScenarioSpec,
    sources: &[Option<Vec<f32>>],
    noise: &NoiseSpec,
    cutout: &CutoutModel,
    seed: u64,
    c: usize,
    opts: &MixOptions,
) -> Result<Vec<f64>> {
    let sr = SAMPLE_RATE;
    let mic = spec.mics.get(c).ok_or(Error::Range {
        index: c,
        len: spec.mics.len(),
    })?;
    let mut buf = vec![0.0f64; n_samples(spec.duration, sr)];
    for (v, s) in spec.vehicles.iter().zip(sources) {
        if let Some(s) = s {
            accumulate_source(&mut buf, v, s, mic, opts, sr);
        }
    }
    // N is rendered on its own and added once, so M = S + N holds sample-exactly
    let mut n = vec![0.0f64; buf.len()];
    add_noise(&mut n, noise, c, mic.id, sr, rng::key(seed, &[rng::tag("noise")]));
    buf.iter_mut().zip(&n).for_each(|(b, v)| *b += v);
    apply_cutout(&mut buf, cutout, sr, rng::key(seed, &[rng::tag("cutout"), c as u64]))?;
    Ok(buf)
}

pub fn limit(x: f64) -> f32 {
    x.clamp(-1.0, 1.0) as f32
}

/// Observed microphone signals `M = S + N` for every channel.
pub fn mix_scene(spec: &ScenarioSpec, noise: &NoiseSpec, cutout: &CutoutModel, seed: u64) -> Result<MultichannelAudio> {
    mix_scene_with(spec, noise, cutout, seed, &MixOptions::default())
}

pub fn mix_scene_with(
    spec: &ScenarioSpec,
    noise: &NoiseSpec,
    cutout: &CutoutModel,
    seed: u64,
    opts: &MixOptions,
) -> Result<MultichannelAudio> {
    spec.validate()?;
    noise.validate(spec.duration)?;
    cutout.validate()?;
    let sources = render_engine_sources(spec, seed)?;
    let mut channels = Vec::with_capacity(spec.mics.len());
    for c in 0..spec.mics.len() {
        let pre = mix_channel_prelimit(spec, &sources, noise, cutout, seed, c, opts)?;
        channels.push(pre.into_iter().map(limit).collect());
    }
    Ok(MultichannelAudio {
        sr: SAMPLE_RATE,
        mic_ids: spec.mics.iter().map(|m| m.id).collect(),
        channels,
    })
}

/// Pre-limiter render of every channel (test and analysis helper).
pub fn mix_scene_prelimit(
    spec: &ScenarioSpec,
    noise: &NoiseSpec,
    cutout: &CutoutModel,
    seed: u64,
    opts: &MixOptions,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    noise.validate(spec.duration)?;
    let sources = render_engine_sources(spec, seed)?;
    (0..spec.mics.len())
        .map(|c| mix_channel_prelimit(spec, &sources, noise, cutout, seed, c, opts))
        .collect()
}
