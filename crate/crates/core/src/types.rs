//! Vocabulary shared by every stage.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Final per-vehicle status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Moving,
    Off,
    Idling,
}

impl Status {
    pub const ALL: [Status; 3] = [Status::Moving, Status::Off, Status::Idling];

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Moving => "moving",
            Status::Off => "off",
            Status::Idling => "idling",
        }
    }

    pub fn motion(self) -> Motion {
        match self {
            Status::Moving => Motion::Moving,
            Status::Off | Status::Idling => Motion::Stationary,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Output of the visual motion detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Motion {
    Moving,
    Stationary,
}

impl Motion {
    pub fn flipped(self) -> Motion {
        match self {
            Motion::Moving => Motion::Stationary,
            Motion::Stationary => Motion::Moving,
        }
    }
}

/// Binary engine-sound label of an audio window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AudioLabel {
    Foreground,
    Background,
}

impl AudioLabel {
    pub fn class_id(self) -> u32 {
        match self {
            AudioLabel::Background => 0,
            AudioLabel::Foreground => 1,
        }
    }

    pub fn is_foreground(self) -> bool {
        matches!(self, AudioLabel::Foreground)
    }
}

/// Axis-aligned pixel box `(x0, y0)`–`(x1, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl PixelBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> f64 {
        (self.x1 - self.x0).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.y1 - self.y0).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn centroid(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn is_valid(&self) -> bool {
        [self.x0, self.y0, self.x1, self.y1].iter().all(|v| v.is_finite())
            && self.x0 < self.x1
            && self.y0 < self.y1
    }

    /// Clips to `[0, width] x [0, height]`; `None` when nothing remains.
    pub fn clipped(&self, width: f64, height: f64) -> Option<PixelBox> {
        let b = PixelBox {
            x0: self.x0.clamp(0.0, width),
            y0: self.y0.clamp(0.0, height),
            x1: self.x1.clamp(0.0, width),
            y1: self.y1.clamp(0.0, height),
        };
        b.is_valid().then_some(b)
    }
}

/// One box reported by the visual motion detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: PixelBox,
    pub motion: Motion,
    pub confidence: f64,
    /// Simulator vehicle id behind the box, when known. Spurious boxes carry `None`.
    pub source_id: Option<u32>,
}

impl Detection {
    pub fn is_valid(&self) -> bool {
        self.bbox.is_valid() && self.confidence > 0.0 && self.confidence <= 1.0
    }
}
