//! JSON Lines exchange format for ground truth and detections, one frame per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::truth::{GroundTruthFrame, GtBox};
use crate::error::{Error, Result};
use crate::types::{Detection, Motion, PixelBox, Status};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub id: Option<u32>,
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub label: String,
    pub conf: f64,
}

impl BoxRecord {
    pub fn bbox(&self) -> PixelBox {
        PixelBox::new(self.x0, self.y0, self.x1, self.y1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub boxes: Vec<BoxRecord>,
}

impl From<&GroundTruthFrame> for FrameRecord {
    fn from(gt: &GroundTruthFrame) -> Self {
        FrameRecord {
            frame: gt.frame_index,
            boxes: gt
                .boxes
                .iter()
                .map(|g| BoxRecord {
                    id: Some(g.id),
                    x0: g.bbox.x0,
                    y0: g.bbox.y0,
                    x1: g.bbox.x1,
                    y1: g.bbox.y1,
                    label: g.status.as_str().to_string(),
                    conf: 1.0,
                })
                .collect(),
        }
    }
}

impl FrameRecord {
    pub fn from_detections(frame: usize, dets: &[Detection]) -> Self {
        FrameRecord {
            frame,
            boxes: dets
                .iter()
                .map(|d| BoxRecord {
                    id: d.source_id,
                    x0: d.bbox.x0,
                    y0: d.bbox.y0,
                    x1: d.bbox.x1,
                    y1: d.bbox.y1,
                    label: motion_str(d.motion).to_string(),
                    conf: d.confidence,
                })
                .collect(),
        }
    }

    pub fn to_ground_truth(&self, fps: f64) -> Result<GroundTruthFrame> {
        let boxes = self
            .boxes
            .iter()
            .map(|b| {
                Ok(GtBox {
                    id: b.id.ok_or_else(|| Error::data(format!("frame {}: ground-truth box without id", self.frame)))?,
                    bbox: b.bbox(),
                    status: parse_status(&b.label)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GroundTruthFrame {
            frame_index: self.frame,
            t: self.frame as f64 / fps,
            boxes,
        })
    }

    pub fn to_detections(&self) -> Result<Vec<Detection>> {
        self.boxes
            .iter()
            .map(|b| {
                Ok(Detection {
                    bbox: b.bbox(),
                    motion: parse_motion(&b.label)?,
                    confidence: b.conf,
                    source_id: b.id,
                })
            })
            .collect()
    }
}

pub fn motion_str(m: Motion) -> &'static str {
    match m {
        Motion::Moving => "moving",
        Motion::Stationary => "stationary",
    }
}

pub fn parse_status(s: &str) -> Result<Status> {
    match s {
        "moving" => Ok(Status::Moving),
        "off" => Ok(Status::Off),
        "idling" => Ok(Status::Idling),
        other => Err(Error::data(format!("unknown status label {other:?}"))),
    }
}

/// Accepts motion labels and, for oracle runs, ground-truth status labels.
pub fn parse_motion(s: &str) -> Result<Motion> {
    match s {
        "moving" => Ok(Motion::Moving),
        "stationary" | "off" | "idling" => Ok(Motion::Stationary),
        other => Err(Error::data(format!("unknown motion label {other:?}"))),
    }
}

pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, items: impl IntoIterator<Item = T>) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
    }
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>, R: BufRead>(r: R) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<jsonl>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::data(format!("line {}: {e}", n + 1)))?,
        );
    }
    Ok(out)
}
