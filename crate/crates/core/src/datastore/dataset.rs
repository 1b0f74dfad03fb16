//! Labelled audio windows cut from a simulated recording.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{nearest_mic, MicPixelMap};
use crate::rng;
use crate::scenesim::{ground_truth_at, ScenarioSpec};
use crate::types::{AudioLabel, Status};

pub const DEFAULT_STRIDE_S: f64 = 3.0;

/// One labelled window: `channel_file` at `center_time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioSampleRef {
    pub scenario: String,
    pub channel_file: String,
    pub channel: usize,
    pub mic_id: u32,
    pub center_time: f64,
    pub label: AudioLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub stride: f64,
    /// Unassigned microphones count as background only when no running
    /// engine is within this many meters.
    pub clear_radius: f64,
    /// Cap on background windows per foreground window applied by
    /// [`balance_refs`]; `None` keeps everything.
    pub background_ratio: Option<f64>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            stride: DEFAULT_STRIDE_S,
            clear_radius: 4.0,
            background_ratio: Some(1.5),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.stride > 0.0 && self.stride.is_finite()) {
            return Err(Error::config("dataset stride must be > 0"));
        }
        if !(self.clear_radius >= 0.0) {
            return Err(Error::config("clear_radius must be >= 0"));
        }
        if self.background_ratio.is_some_and(|r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::config("background_ratio must be > 0"));
        }
        Ok(())
    }
}

/// Labels every microphone at each stride tick `t_k = k * stride < duration`.
///
/// Stationary vehicles are assigned to their nearest microphone the same way
/// the fusion stage does it; an assigned microphone is foreground iff one of
/// its vehicles has the engine running. Unassigned microphones are background
/// when no running engine (parked or passing) is within `clear_radius`, and
/// are left out otherwise.
pub fn build_audio_dataset(
    spec: &ScenarioSpec,
    scenario: &str,
    channel_files: &[String],
    cfg: &DatasetConfig,
) -> Result<Vec<AudioSampleRef>> {
    cfg.validate()?;
    if channel_files.len() != spec.mics.len() {
        return Err(Error::config(format!(
            "{} channel files for {} microphones",
            channel_files.len(),
            spec.mics.len()
        )));
    }
    let map = MicPixelMap::from_scenario(spec)?;
    let n_ticks = ((spec.duration - 1e-9) / cfg.stride).floor() as usize + 1;
    let mut out = Vec::new();
    let mut any_stationary = false;
    for k in 0..n_ticks {
        let t = k as f64 * cfg.stride;
        let frame = spec.frame_at(t).min(spec.n_frames().saturating_sub(1));
        let gt = ground_truth_at(spec, frame)?;
        let mut assigned: BTreeMap<u32, bool> = BTreeMap::new();
        for g in gt.boxes.iter().filter(|g| g.status != Status::Moving) {
            any_stationary = true;
            let mic = nearest_mic(&g.bbox, &map)?;
            *assigned.entry(mic).or_default() |= g.status == Status::Idling;
        }
        for (c, mic) in spec.mics.iter().enumerate() {
            let label = match assigned.get(&mic.id) {
                Some(true) => AudioLabel::Foreground,
                Some(false) => AudioLabel::Background,
                None => {
                    let engine_near = spec.vehicles.iter().any(|v| {
                        v.state_at(t)
                            .is_some_and(|s| s.engine_on && (s.x - mic.x).hypot(s.y - mic.y) <= cfg.clear_radius)
                    });
                    if engine_near {
                        continue;
                    }
                    AudioLabel::Background
                }
            };
            out.push(AudioSampleRef {
                scenario: scenario.to_string(),
                channel_file: channel_files[c].clone(),
                channel: c,
                mic_id: mic.id,
                center_time: t,
                label,
            });
        }
    }
    if !any_stationary {
        log::warn!("scenario {scenario}: no stationary vehicles, dataset is background only");
    }
    Ok(out)
}

/// Keeps every foreground window and a seeded random subset of at most
/// `ratio * n_foreground` background windows, preserving the input order.
pub fn balance_refs(refs: &[AudioSampleRef], ratio: Option<f64>, seed: u64) -> Vec<AudioSampleRef> {
    let Some(ratio) = ratio else {
        return refs.to_vec();
    };
    let (fg, bg) = label_counts(refs);
    let keep = ((fg as f64 * ratio).round() as usize).min(bg);
    let mut bg_idx: Vec<usize> = (0..refs.len()).filter(|&i| !refs[i].label.is_foreground()).collect();
    bg_idx.shuffle(&mut rng::stream(seed, &[rng::tag("balance")]));
    let kept: std::collections::BTreeSet<usize> = bg_idx.into_iter().take(keep).collect();
    refs.iter()
        .enumerate()
        .filter(|(i, r)| r.label.is_foreground() || kept.contains(i))
        .map(|(_, r)| r.clone())
        .collect()
}

pub fn label_counts(refs: &[AudioSampleRef]) -> (usize, usize) {
    let fg = refs.iter().filter(|r| r.label.is_foreground()).count();
    (fg, refs.len() - fg)
}
