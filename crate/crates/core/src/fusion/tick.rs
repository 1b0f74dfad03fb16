use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::micmap::{nearest_mic, MicPixelMap};
use crate::audiosynth::MultichannelAudio;
use crate::contrastive::AudioModel;
use crate::dsp::{extract_window_with, WindowAnchor, DEFAULT_WINDOW_S};
use crate::error::{Error, Result};
use crate::types::{AudioLabel, Detection, Motion, PixelBox, Status};

/// Anything that labels a raw audio window as engine / no engine.
pub trait WindowClassifier: Sync {
    /// Label and foreground score in `[0, 1]`.
    fn classify_window(&self, segment: &[f32]) -> Result<(AudioLabel, f64)>;
}

impl WindowClassifier for AudioModel {
    fn classify_window(&self, segment: &[f32]) -> Result<(AudioLabel, f64)> {
        self.classify_segment(segment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TickConfig {
    /// Seconds between ticks.
    pub cadence: f64,
    pub window_s: f64,
    pub latency_budget_ms: f64,
    pub anchor: WindowAnchor,
}

impl Default for TickConfig {
    fn default() -> Self {
        Self {
            cadence: 1.0,
            window_s: DEFAULT_WINDOW_S,
            latency_budget_ms: 1000.0,
            anchor: WindowAnchor::Centered,
        }
    }
}

impl TickConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cadence > 0.0 && self.cadence.is_finite()) {
            return Err(Error::config("cadence must be > 0"));
        }
        if !(self.window_s > 0.0 && self.window_s.is_finite()) {
            return Err(Error::config("window length must be > 0"));
        }
        if !(self.latency_budget_ms > 0.0) {
            return Err(Error::config("latency budget must be > 0"));
        }
        Ok(())
    }
}

/// One fused detection. Moving boxes carry no microphone or audio score;
/// stationary boxes always name the microphone they were assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub status: Status,
    pub conf: f64,
    pub mic: Option<u32>,
    pub audio_score: Option<f64>,
    /// Set when the audio stage failed for this box (it is then reported off).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl PredBox {
    pub fn bbox(&self) -> PixelBox {
        PixelBox::new(self.x0, self.y0, self.x1, self.y1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePrediction {
    pub frame: usize,
    pub t: f64,
    pub boxes: Vec<PredBox>,
    /// Wall-clock processing time; only recorded in real-time mode so that
    /// offline outputs are reproducible.
    pub latency_ms: Option<f64>,
}

/// Applies the replacement rule to one tick's detections: moving boxes pass
/// through; each stationary box is labelled from its nearest microphone's
/// audio window (foreground → idling, background → off).
pub fn fuse_tick<C: WindowClassifier + ?Sized>(
    detections: &[Detection],
    audio: &MultichannelAudio,
    t: f64,
    map: &MicPixelMap,
    model: &C,
    cfg: &TickConfig,
) -> Result<Vec<PredBox>> {
    let mut assigned = Vec::with_capacity(detections.len());
    for d in detections {
        assigned.push(match d.motion {
            Motion::Moving => None,
            Motion::Stationary => Some(nearest_mic(&d.bbox, map)?),
        });
    }
    // one classification per microphone, shared by every box assigned to it
    let mics: Vec<u32> = assigned.iter().flatten().copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let results: Vec<(u32, std::result::Result<(AudioLabel, f64), String>)> = mics
        .par_iter()
        .map(|&mic| {
            let r = match audio.channel_of(mic) {
                None => Err(format!("missing audio channel for mic {mic}")),
                Some(ch) => extract_window_with(audio, ch, t, cfg.window_s, cfg.anchor)
                    .and_then(|w| model.classify_window(&w))
                    .map_err(|e| e.to_string()),
            };
            (mic, r)
        })
        .collect();
    let by_mic: BTreeMap<u32, _> = results.into_iter().collect();

    Ok(detections
        .iter()
        .zip(&assigned)
        .map(|(d, mic)| {
            let b = d.bbox;
            let mut p = PredBox {
                x0: b.x0,
                y0: b.y0,
                x1: b.x1,
                y1: b.y1,
                status: Status::Moving,
                conf: d.confidence,
                mic: *mic,
                audio_score: None,
                error: None,
            };
            if let Some(mic) = mic {
                match &by_mic[mic] {
                    Ok((label, score)) => {
                        let fg = label.is_foreground();
                        p.status = if fg { Status::Idling } else { Status::Off };
                        p.conf = d.confidence * if fg { *score } else { 1.0 - *score };
                        p.audio_score = Some(*score);
                    }
                    Err(msg) => {
                        p.status = Status::Off;
                        p.error = Some(msg.clone());
                    }
                }
            }
            p
        })
        .collect())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::contrastive::decide;
    use crate::fusion::MicPixel;

    /// Foreground when the window RMS exceeds a fixed level.
    pub(crate) struct EnergyClassifier(pub f64);

    impl WindowClassifier for EnergyClassifier {
        fn classify_window(&self, segment: &[f32]) -> Result<(AudioLabel, f64)> {
            let rms = (segment.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / segment.len() as f64).sqrt();
            let score = if rms >= self.0 { 0.9 } else { 0.1 };
            Ok((decide(score, 0.5), score))
        }
    }

    fn det(x: f64, motion: Motion) -> Detection {
        Detection {
            bbox: PixelBox::new(x, 0.0, x + 10.0, 10.0),
            motion,
            confidence: 0.8,
            source_id: None,
        }
    }

    fn setup() -> (MultichannelAudio, MicPixelMap) {
        let loud: Vec<f32> = (0..1000).map(|i| if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
        let audio = MultichannelAudio {
            sr: 100,
            mic_ids: vec![0, 1],
            channels: vec![loud, vec![0.0; 1000]],
        };
        let map = MicPixelMap {
            mics: vec![
                MicPixel { mic_id: 0, u: 0.0, v: 0.0 },
                MicPixel { mic_id: 1, u: 100.0, v: 0.0 },
                MicPixel { mic_id: 2, u: 200.0, v: 0.0 },
            ],
        };
        (audio, map)
    }

    #[test]
    fn replacement_rule() {
        let (audio, map) = setup();
        let cfg = TickConfig::default();
        let clf = EnergyClassifier(0.1);
        assert!(fuse_tick(&[], &audio, 3.0, &map, &clf, &cfg).unwrap().is_empty());

        let dets = [
            det(0.0, Motion::Moving),
            det(0.0, Motion::Stationary),
            det(95.0, Motion::Stationary),
            det(195.0, Motion::Stationary),
        ];
        let out = fuse_tick(&dets, &audio, 5.0, &map, &clf, &cfg).unwrap();
        assert_eq!(out[0].status, Status::Moving);
        assert_eq!((out[0].mic, out[0].audio_score, out[0].conf), (None, None, 0.8));
        assert_eq!((out[1].status, out[1].mic), (Status::Idling, Some(0)));
        assert!((out[1].conf - 0.72).abs() < 1e-12);
        assert_eq!((out[2].status, out[2].mic), (Status::Off, Some(1)));
        // mic 2 has no channel: flagged, the others unaffected
        assert_eq!((out[3].status, out[3].mic), (Status::Off, Some(2)));
        assert!(out[3].error.as_deref().unwrap().contains("mic 2"));
        assert!(out[..3].iter().all(|p| p.error.is_none()));
    }

    #[test]
    fn json_shape() {
        let p = PredBox {
            x0: 1.0,
            y0: 2.0,
            x1: 3.0,
            y1: 4.0,
            status: Status::Idling,
            conf: 0.5,
            mic: Some(3),
            audio_score: Some(0.75),
            error: None,
        };
        let f = FramePrediction {
            frame: 25,
            t: 1.0,
            boxes: vec![p],
            latency_ms: None,
        };
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"{"frame":25,"t":1.0,"boxes":[{"x0":1.0,"y0":2.0,"x1":3.0,"y1":4.0,"status":"idling","conf":0.5,"mic":3,"audio_score":0.75}],"latency_ms":null}"#
        );
    }
}
