use serde::{Deserialize, Serialize};

use super::scenario::ScenarioSpec;
use crate::error::Result;
use crate::types::{PixelBox, Status};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtBox {
    pub id: u32,
    pub bbox: PixelBox,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFrame {
    pub frame_index: usize,
    pub t: f64,
    pub boxes: Vec<GtBox>,
}

impl GroundTruthFrame {
    pub fn get(&self, id: u32) -> Option<&GtBox> {
        self.boxes.iter().find(|b| b.id == id)
    }
}

/// Vehicle boxes and statuses at one video frame. Vehicles whose box misses
/// the image entirely are omitted.
pub fn ground_truth_at(spec: &ScenarioSpec, frame_index: usize) -> Result<GroundTruthFrame> {
    spec.check_frame(frame_index)?;
    let t = spec.frame_time(frame_index);
    let mut boxes = Vec::new();
    for v in &spec.vehicles {
        let Some(status) = v.status_at(t) else {
            continue;
        };
        if let Some(bbox) = v.box_at(&spec.camera, t)? {
            boxes.push(GtBox {
                id: v.id,
                bbox,
                status,
            });
        }
    }
    Ok(GroundTruthFrame {
        frame_index,
        t,
        boxes,
    })
}
