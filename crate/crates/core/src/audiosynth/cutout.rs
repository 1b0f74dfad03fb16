//! Wireless-link cutouts: the receiver loses the signal and the sample value
//! jumps between a few fixed levels until the link recovers.

use std::ops::Range;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoutModel {
    /// Expected cutouts per minute per channel.
    pub rate: f64,
    /// Cutout length bounds, seconds.
    pub duration_range: (f64, f64),
    pub artifact_values: Vec<f64>,
    /// Intervals (start, end) in seconds applied on every channel in addition
    /// to the random ones.
    #[serde(default)]
    pub forced_intervals: Vec<(f64, f64)>,
}

impl Default for CutoutModel {
    fn default() -> Self {
        Self {
            rate: 1.0,
            duration_range: (0.2, 1.0),
            artifact_values: vec![-0.0156, 0.0, 0.0156],
            forced_intervals: Vec::new(),
        }
    }
}

impl CutoutModel {
    pub fn none() -> Self {
        Self {
            rate: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::config("cutout rate must be >= 0"));
        }
        let (lo, hi) = self.duration_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::config("cutout durations must be > 0 with min <= max"));
        }
        if self.artifact_values.is_empty() && (self.rate > 0.0 || !self.forced_intervals.is_empty()) {
            return Err(Error::config("cutout artifact_values must not be empty"));
        }
        if self.artifact_values.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
            return Err(Error::config("cutout artifact values must lie in [-1, 1]"));
        }
        if self.forced_intervals.iter().any(|&(a, b)| !(a >= 0.0 && b > a)) {
            return Err(Error::config("forced cutout intervals must satisfy 0 <= start < end"));
        }
        Ok(())
    }
}

/// Sample ranges affected on a channel of `len` samples.
pub fn cutout_intervals(model: &CutoutModel, len: usize, sr: u32, seed: u64) -> Vec<Range<usize>> {
    let srf = sr as f64;
    let to_range = |a: f64, b: f64| {
        let s = ((a * srf).round() as usize).min(len);
        let e = ((b * srf).round() as usize).min(len);
        s..e
    };
    let mut out: Vec<Range<usize>> = model
        .forced_intervals
        .iter()
        .map(|&(a, b)| to_range(a, b))
        .filter(|r| !r.is_empty())
        .collect();
    let minutes = len as f64 / srf / 60.0;
    let mean = model.rate * minutes;
    if mean > 0.0 {
        let mut r = rng::stream(seed, &[rng::tag("cutout-place")]);
        let count = Poisson::new(mean).map(|p| p.sample(&mut r) as usize).unwrap_or(0);
        let (lo, hi) = model.duration_range;
        for _ in 0..count {
            let start = r.random_range(0.0..len as f64 / srf);
            let d = if hi > lo { r.random_range(lo..hi) } else { lo };
            let range = to_range(start, start + d);
            if !range.is_empty() {
                out.push(range);
            }
        }
    }
    out
}

/// Overwrites `range` with values hopping between `values`.
pub fn write_artifact<R: Rng>(signal: &mut [f64], range: Range<usize>, values: &[f64], r: &mut R) {
    if values.is_empty() {
        return;
    }
    let mut current = r.random_range(0..values.len());
    let mut i = range.start;
    while i < range.end {
        let hold = r.random_range(1..=24usize);
        let stop = (i + hold).min(range.end);
        signal[i..stop].fill(values[current]);
        i = stop;
        if values.len() > 1 {
            let next = r.random_range(0..values.len() - 1);
            current = if next >= current { next + 1 } else { next };
        }
    }
}

/// Applies random and forced cutouts; samples outside the intervals are untouched.
pub fn apply_cutout(signal: &mut [f64], model: &CutoutModel, sr: u32, seed: u64) -> Result<()> {
    model.validate()?;
    let intervals = cutout_intervals(model, signal.len(), sr, seed);
    let mut r = rng::stream(seed, &[rng::tag("cutout-values")]);
    for range in intervals {
        write_artifact(signal, range, &model.artifact_values, &mut r);
    }
    Ok(())
}
