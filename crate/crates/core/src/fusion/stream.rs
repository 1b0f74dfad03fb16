//! Tick scheduling, offline replay and real-time pacing.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::micmap::MicPixelMap;
use super::tick::{fuse_tick, FramePrediction, TickConfig, WindowClassifier};
use crate::audiosynth::MultichannelAudio;
use crate::error::{Error, Result};
use crate::scenesim::{oracle_detections, simulate_detections, DetectorNoiseModel, ScenarioSpec};
use crate::types::Detection;

/// Supplies detector output for a video frame.
pub trait DetectionSource {
    fn detections(&mut self, frame: usize) -> Result<Vec<Detection>>;
}

/// Detections simulated from a scenario, either noisy or oracle.
pub struct ScenarioDetections<'a> {
    spec: &'a ScenarioSpec,
    noise: Option<DetectorNoiseModel>,
}

impl<'a> ScenarioDetections<'a> {
    pub fn noisy(spec: &'a ScenarioSpec, noise: DetectorNoiseModel) -> Result<Self> {
        noise.validate()?;
        Ok(Self { spec, noise: Some(noise) })
    }

    pub fn oracle(spec: &'a ScenarioSpec) -> Self {
        Self { spec, noise: None }
    }
}

impl DetectionSource for ScenarioDetections<'_> {
    fn detections(&mut self, frame: usize) -> Result<Vec<Detection>> {
        match &self.noise {
            Some(n) => simulate_detections(self.spec, n, frame),
            None => oracle_detections(self.spec, frame),
        }
    }
}

/// Pre-recorded detections keyed by frame; frames without a record have no boxes.
#[derive(Debug, Clone, Default)]
pub struct RecordedDetections {
    frames: BTreeMap<usize, Vec<Detection>>,
}

impl RecordedDetections {
    /// `frames` must arrive in strictly increasing frame order.
    pub fn new(frames: Vec<(usize, Vec<Detection>)>) -> Result<Self> {
        if let Some(w) = frames.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(Error::Stream(format!(
                "detection frames out of order: {} follows {}",
                w[1].0, w[0].0
            )));
        }
        Ok(Self {
            frames: frames.into_iter().collect(),
        })
    }
}

impl DetectionSource for RecordedDetections {
    fn detections(&mut self, frame: usize) -> Result<Vec<Detection>> {
        Ok(self.frames.get(&frame).cloned().unwrap_or_default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// As fast as possible; outputs carry no timing and are reproducible.
    Offline,
    /// Tick `k` fires once `(k + 1) * cadence` seconds have elapsed.
    Realtime,
}

/// One tick of the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tick {
    pub index: usize,
    pub t: f64,
    pub frame: usize,
}

/// Ticks at `t_k = k * cadence` covering `[0, duration)`.
pub fn tick_schedule(duration: f64, fps: f64, cadence: f64) -> Result<Vec<Tick>> {
    if !(cadence > 0.0 && cadence.is_finite()) {
        return Err(Error::config("cadence must be > 0"));
    }
    if !(duration > 0.0 && fps > 0.0) {
        return Err(Error::config("duration and fps must be > 0"));
    }
    let n = ((duration - 1e-9) / cadence).floor() as usize + 1;
    let ticks: Vec<Tick> = (0..n)
        .map(|k| {
            let t = k as f64 * cadence;
            Tick {
                index: k,
                t,
                frame: (t * fps).round() as usize,
            }
        })
        .collect();
    if ticks.windows(2).any(|w| w[1].frame == w[0].frame) {
        return Err(Error::config(format!(
            "cadence {cadence} s is shorter than one frame at {fps} fps"
        )));
    }
    Ok(ticks)
}

/// Wall-clock accounting of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub n_ticks: usize,
    pub latencies_ms: Vec<f64>,
    /// Tick indices whose latency exceeded the budget. They are still emitted.
    pub over_budget: Vec<usize>,
    /// Seconds from the start of the run to each tick's emission.
    pub emitted_at: Vec<f64>,
}

/// Drives the pipeline over every tick of `spec`, handing each prediction to `sink`.
#[allow(clippy::too_many_arguments)]
pub fn run_stream<S, C, F>(
    spec: &ScenarioSpec,
    source: &mut S,
    audio: &MultichannelAudio,
    map: &MicPixelMap,
    model: &C,
    cfg: &TickConfig,
    mode: RunMode,
    mut sink: F,
) -> Result<StreamSummary>
where
    S: DetectionSource + ?Sized,
    C: WindowClassifier + ?Sized,
    F: FnMut(&FramePrediction) -> Result<()>,
{
    cfg.validate()?;
    let ticks = tick_schedule(spec.duration, spec.fps, cfg.cadence)?;
    let mut summary = StreamSummary {
        n_ticks: ticks.len(),
        ..Default::default()
    };
    let start = Instant::now();
    for tick in &ticks {
        let fire = match mode {
            RunMode::Offline => Instant::now(),
            RunMode::Realtime => {
                let due = start + Duration::from_secs_f64((tick.index + 1) as f64 * cfg.cadence);
                let now = Instant::now();
                if due > now {
                    std::thread::sleep(due - now);
                }
                due.max(now)
            }
        };
        let dets = source.detections(tick.frame)?;
        let boxes = fuse_tick(&dets, audio, tick.t, map, model, cfg)?;
        let latency = fire.elapsed().as_secs_f64() * 1e3;
        let pred = FramePrediction {
            frame: tick.frame,
            t: tick.t,
            boxes,
            latency_ms: (mode == RunMode::Realtime).then_some(latency),
        };
        sink(&pred)?;
        if latency > cfg.latency_budget_ms {
            log::warn!("tick {} took {latency:.1} ms (budget {} ms)", tick.index, cfg.latency_budget_ms);
            summary.over_budget.push(tick.index);
        }
        summary.latencies_ms.push(latency);
        summary.emitted_at.push(start.elapsed().as_secs_f64());
    }
    Ok(summary)
}

/// Offline convenience wrapper collecting every prediction.
pub fn replay<S, C>(
    spec: &ScenarioSpec,
    source: &mut S,
    audio: &MultichannelAudio,
    map: &MicPixelMap,
    model: &C,
    cfg: &TickConfig,
) -> Result<(Vec<FramePrediction>, StreamSummary)>
where
    S: DetectionSource + ?Sized,
    C: WindowClassifier + ?Sized,
{
    let mut preds = Vec::new();
    let summary = run_stream(spec, source, audio, map, model, cfg, RunMode::Offline, |p| {
        preds.push(p.clone());
        Ok(())
    })?;
    Ok((preds, summary))
}
