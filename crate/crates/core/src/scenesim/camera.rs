use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::PixelBox;

/// Planar ground-to-image homography plus image size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    /// Row-major 3x3 matrix mapping homogeneous world `(x, y, 1)` to pixels.
    pub homography: [[f64; 3]; 3],
    pub width: u32,
    pub height: u32,
}

impl Default for CameraModel {
    /// Elevated view across a two-lane drop-off zone. World x runs along the
    /// roadside, world y away from the microphone wall; the far lane appears
    /// higher and smaller in the image.
    fn default() -> Self {
        Self {
            homography: [[55.0, 32.0, 282.5], [0.0, -70.2, 690.0], [0.0, 0.05, 1.0]],
            width: 1280,
            height: 720,
        }
    }
}

impl CameraModel {
    pub fn identity(width: u32, height: u32) -> Self {
        Self {
            homography: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            width,
            height,
        }
    }

    pub fn determinant(&self) -> f64 {
        let h = &self.homography;
        h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1])
            - h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0])
            + h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("camera image size must be positive"));
        }
        if self.homography.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::config("camera homography has non-finite entries"));
        }
        if self.determinant().abs() < 1e-12 {
            return Err(Error::config("camera homography is singular"));
        }
        Ok(())
    }

    /// World point (meters) to pixel coordinates.
    pub fn project(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::Geometry(format!("non-finite world point ({x}, {y})")));
        }
        let h = &self.homography;
        let w = h[2][0] * x + h[2][1] * y + h[2][2];
        if w.abs() < 1e-12 {
            return Err(Error::Geometry(format!(
                "world point ({x}, {y}) maps to the line at infinity"
            )));
        }
        let u = (h[0][0] * x + h[0][1] * y + h[0][2]) / w;
        let v = (h[1][0] * x + h[1][1] * y + h[1][2]) / w;
        Ok((u, v))
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }
}

/// Axis-aligned box around the projected corners, clipped to the image.
/// Returns `Ok(None)` when the box falls entirely outside the image.
pub fn project_box(camera: &CameraModel, corners: &[(f64, f64)]) -> Result<Option<PixelBox>> {
    if corners.is_empty() {
        return Err(Error::Geometry("no corners to project".into()));
    }
    let mut b = PixelBox::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in corners {
        let (u, v) = camera.project(x, y)?;
        b.x0 = b.x0.min(u);
        b.y0 = b.y0.min(v);
        b.x1 = b.x1.max(u);
        b.y1 = b.y1.max(v);
    }
    Ok(b.clipped(camera.width as f64, camera.height as f64))
}
