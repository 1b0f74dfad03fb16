//! Noisy stand-in for the video motion detector.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::scenario::ScenarioSpec;
use super::truth::ground_truth_at;
use crate::error::{Error, Result};
use crate::rng;
use crate::types::{Detection, Motion, PixelBox};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorNoiseModel {
    /// Standard deviation of per-coordinate box jitter, pixels.
    pub box_jitter_sigma: f64,
    pub miss_prob: f64,
    /// Expected spurious boxes per frame.
    pub false_positive_rate: f64,
    pub motion_flip_prob: f64,
    /// Upper bound of the uniform confidence penalty applied to true boxes.
    #[serde(default = "default_spread")]
    pub confidence_spread: f64,
}

fn default_spread() -> f64 {
    0.1
}

impl Default for DetectorNoiseModel {
    fn default() -> Self {
        Self {
            box_jitter_sigma: 4.0,
            miss_prob: 0.02,
            false_positive_rate: 0.05,
            motion_flip_prob: 0.03,
            confidence_spread: default_spread(),
        }
    }
}

impl DetectorNoiseModel {
    /// Oracle detector: ground-truth boxes, confidence 1.
    pub fn none() -> Self {
        Self {
            box_jitter_sigma: 0.0,
            miss_prob: 0.0,
            false_positive_rate: 0.0,
            motion_flip_prob: 0.0,
            confidence_spread: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be in [0, 1], got {p}")))
            }
        };
        prob("miss_prob", self.miss_prob)?;
        prob("motion_flip_prob", self.motion_flip_prob)?;
        prob("confidence_spread", self.confidence_spread)?;
        if !(self.box_jitter_sigma >= 0.0 && self.box_jitter_sigma.is_finite()) {
            return Err(Error::config("box_jitter_sigma must be >= 0"));
        }
        if !(self.false_positive_rate >= 0.0 && self.false_positive_rate.is_finite()) {
            return Err(Error::config("false_positive_rate must be >= 0"));
        }
        Ok(())
    }
}

const MIN_CONF: f64 = 0.05;

/// Detections for one frame. Each vehicle draws from its own keyed stream, so
/// frames and vehicles may be evaluated in any order.
pub fn simulate_detections(
    spec: &ScenarioSpec,
    noise: &DetectorNoiseModel,
    frame_index: usize,
) -> Result<Vec<Detection>> {
    noise.validate()?;
    let gt = ground_truth_at(spec, frame_index)?;
    let (w, h) = (spec.camera.width as f64, spec.camera.height as f64);
    let jitter = Normal::new(0.0, noise.box_jitter_sigma).map_err(|e| Error::config(e.to_string()))?;
    let mut out = Vec::with_capacity(gt.boxes.len());

    for g in &gt.boxes {
        let mut r = rng::stream(spec.seed, &[rng::tag("detector"), frame_index as u64, g.id as u64]);
        // fixed draw order keeps the stream aligned whatever the outcome
        let miss: f64 = r.random();
        let j: [f64; 4] = std::array::from_fn(|_| jitter.sample(&mut r));
        let flip: f64 = r.random();
        let penalty: f64 = r.random::<f64>() * noise.confidence_spread;
        if miss < noise.miss_prob {
            continue;
        }
        let b = g.bbox;
        let (xa, xb) = (b.x0 + j[0], b.x1 + j[2]);
        let (ya, yb) = (b.y0 + j[1], b.y1 + j[3]);
        let jittered = PixelBox::new(xa.min(xb), ya.min(yb), xa.max(xb), ya.max(yb));
        let Some(bbox) = jittered.clipped(w, h) else {
            continue;
        };
        let mag = j.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diag = b.diagonal().max(1e-9);
        let confidence = (1.0 - mag / diag - penalty).clamp(MIN_CONF, 1.0);
        let truth = g.status.motion();
        let motion = if flip < noise.motion_flip_prob { truth.flipped() } else { truth };
        out.push(Detection {
            bbox,
            motion,
            confidence,
            source_id: Some(g.id),
        });
    }

    if noise.false_positive_rate > 0.0 {
        let mut r = rng::stream(spec.seed, &[rng::tag("spurious"), frame_index as u64]);
        let count = Poisson::new(noise.false_positive_rate)
            .map_err(|e| Error::config(e.to_string()))?
            .sample(&mut r) as usize;
        for _ in 0..count {
            let bw = r.random_range(60.0..260.0);
            let bh = bw * r.random_range(0.4..0.8);
            let cx = r.random_range(0.0..w);
            let cy = r.random_range(0.0..h);
            let motion = if r.random::<bool>() { Motion::Moving } else { Motion::Stationary };
            let confidence = r.random_range(0.05..0.5);
            let b = PixelBox::new(cx - bw / 2.0, cy - bh / 2.0, cx + bw / 2.0, cy + bh / 2.0);
            if let Some(bbox) = b.clipped(w, h) {
                out.push(Detection {
                    bbox,
                    motion,
                    confidence,
                    source_id: None,
                });
            }
        }
    }
    Ok(out)
}

/// Ground truth repackaged as detector output (confidence 1).
pub fn oracle_detections(spec: &ScenarioSpec, frame_index: usize) -> Result<Vec<Detection>> {
    Ok(ground_truth_at(spec, frame_index)?
        .boxes
        .into_iter()
        .map(|g| Detection {
            bbox: g.bbox,
            motion: g.status.motion(),
            confidence: 1.0,
            source_id: Some(g.id),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audiosynth::EngineSoundParams;
    use crate::scenesim::{EngineEvent, Footprint, Powertrain, VehicleTrack, Waypoint};

    fn scene(duration: f64) -> ScenarioSpec {
        let mut s = ScenarioSpec::empty(duration, 11);
        s.vehicles.push(VehicleTrack {
            id: 3,
            path: vec![
                Waypoint { t: 0.0, x: -2.0, y: 2.5 },
                Waypoint { t: duration / 2.0, x: 6.0, y: 2.5 },
                Waypoint { t: duration, x: 6.0, y: 2.5 },
            ],
            engine_timeline: vec![EngineEvent { t: 0.0, engine_on: true }],
            powertrain: Powertrain::Combustion,
            footprint: Footprint::default(),
            engine_params: Some(EngineSoundParams::default()),
        });
        s
    }

    #[test]
    fn zero_noise_reproduces_ground_truth() {
        let s = scene(4.0);
        for f in 0..s.n_frames() {
            let d = simulate_detections(&s, &DetectorNoiseModel::none(), f).unwrap();
            assert_eq!(d, oracle_detections(&s, f).unwrap());
            assert!(d.iter().all(|d| d.confidence == 1.0));
        }
    }

    #[test]
    fn certain_miss_gives_nothing() {
        let s = scene(4.0);
        let noise = DetectorNoiseModel {
            miss_prob: 1.0,
            ..DetectorNoiseModel::none()
        };
        assert!(simulate_detections(&s, &noise, 10).unwrap().is_empty());
    }

    #[test]
    fn miss_and_flip_rates_are_calibrated() {
        let s = scene(400.0);
        let noise = DetectorNoiseModel {
            miss_prob: 0.1,
            motion_flip_prob: 0.2,
            ..DetectorNoiseModel::none()
        };
        let n = 10_000;
        let mut kept = 0usize;
        let mut flipped = 0usize;
        for f in 0..n {
            let gt = ground_truth_at(&s, f).unwrap();
            let d = simulate_detections(&s, &noise, f).unwrap();
            if let Some(d) = d.first() {
                kept += 1;
                if d.motion != gt.boxes[0].status.motion() {
                    flipped += 1;
                }
            }
        }
        let miss_rate = 1.0 - kept as f64 / n as f64;
        assert!((miss_rate - 0.1).abs() < 0.01, "miss rate {miss_rate}");
        // 99% binomial interval around 0.2 with ~9000 trials is about +/- 0.011
        let flip_rate = flipped as f64 / kept as f64;
        assert!((flip_rate - 0.2).abs() < 0.011, "flip rate {flip_rate}");
    }

    #[test]
    fn detections_are_deterministic_and_valid() {
        let s = scene(20.0);
        let noise = DetectorNoiseModel {
            false_positive_rate: 2.0,
            box_jitter_sigma: 10.0,
            ..DetectorNoiseModel::default()
        };
        for f in (0..s.n_frames()).step_by(13) {
            let a = simulate_detections(&s, &noise, f).unwrap();
            let b = simulate_detections(&s, &noise, f).unwrap();
            assert_eq!(a, b);
            assert!(a.iter().all(Detection::is_valid));
        }
    }

    #[test]
    fn rejects_bad_probabilities() {
        let s = scene(4.0);
        let noise = DetectorNoiseModel {
            miss_prob: 1.5,
            ..DetectorNoiseModel::none()
        };
        assert!(simulate_detections(&s, &noise, 0).is_err());
    }
}
