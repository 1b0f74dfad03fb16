use serde::{Deserialize, Serialize};

use crate::audiosynth::MultichannelAudio;
use crate::error::{Error, Result};

/// Audio window length used for classification, seconds.
pub const DEFAULT_WINDOW_S: f64 = 5.0;

/// Where a window sits relative to its reference time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowAnchor {
    /// `[t - L/2, t + L/2)`
    #[default]
    Centered,
    /// `[t - L, t)`: only past audio, for switch-latency experiments.
    Trailing,
}

pub fn window_samples(length_s: f64, sr: u32) -> usize {
    (length_s * sr as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Copies a window out of `channel`, zero-padding anything outside the recording.
pub fn extract_segment(channel: &[f32], sr: u32, time: f64, length_s: f64, anchor: WindowAnchor) -> Vec<f32> {
    let n = window_samples(length_s, sr);
    let at = (time * sr as f64).round() as i64;
    let start = match anchor {
        WindowAnchor::Centered => at - (n / 2) as i64,
        WindowAnchor::Trailing => at - n as i64,
    };
    let mut out = vec![0.0f32; n];
    let lo = start.max(0);
    let hi = (start + n as i64).min(channel.len() as i64);
    if hi > lo {
        let (lo, hi) = (lo as usize, hi as usize);
        let off = (lo as i64 - start) as usize;
        out[off..off + (hi - lo)].copy_from_slice(&channel[lo..hi]);
    }
    out
}

/// Window of `length_s` seconds centered at `center_time` on `channel`.
pub fn extract_window(audio: &MultichannelAudio, channel: usize, center_time: f64, length_s: f64) -> Result<Vec<f32>> {
    extract_window_with(audio, channel, center_time, length_s, WindowAnchor::Centered)
}

pub fn extract_window_with(
    audio: &MultichannelAudio,
    channel: usize,
    time: f64,
    length_s: f64,
    anchor: WindowAnchor,
) -> Result<Vec<f32>> {
    let ch = audio.channels.get(channel).ok_or(Error::Range {
        index: channel,
        len: audio.n_channels(),
    })?;
    Ok(extract_segment(ch, audio.sr, time, length_s, anchor))
}
