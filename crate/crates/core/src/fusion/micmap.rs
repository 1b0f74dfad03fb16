use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenesim::ScenarioSpec;
use crate::types::PixelBox;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicPixel {
    pub mic_id: u32,
    pub u: f64,
    pub v: f64,
}

/// Pixel location of every microphone in the camera image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicPixelMap {
    pub mics: Vec<MicPixel>,
}

impl MicPixelMap {
    pub fn from_scenario(spec: &ScenarioSpec) -> Result<Self> {
        let mics = spec
            .mic_pixels()?
            .into_iter()
            .map(|(mic_id, u, v)| MicPixel { mic_id, u, v })
            .collect();
        let map = Self { mics };
        map.validate(spec.camera.width as f64, spec.camera.height as f64)?;
        Ok(map)
    }

    pub fn validate(&self, width: f64, height: f64) -> Result<()> {
        if self.mics.is_empty() {
            return Err(Error::config("mic map is empty"));
        }
        let mut seen = BTreeSet::new();
        for m in &self.mics {
            if !seen.insert(m.mic_id) {
                return Err(Error::config(format!("duplicate mic id {}", m.mic_id)));
            }
            if !(m.u >= 0.0 && m.u <= width && m.v >= 0.0 && m.v <= height) {
                return Err(Error::config(format!(
                    "mic {} pixel ({}, {}) lies outside the {width}x{height} image",
                    m.mic_id, m.u, m.v
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Microphone closest (Euclidean pixel distance) to the box centroid; ties go
/// to the lowest mic id.
pub fn nearest_mic(bb: &PixelBox, map: &MicPixelMap) -> Result<u32> {
    let (cx, cy) = bb.centroid();
    map.mics
        .iter()
        .map(|m| ((m.u - cx).powi(2) + (m.v - cy).powi(2), m.mic_id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
        .ok_or_else(|| Error::config("mic map is empty"))
}
