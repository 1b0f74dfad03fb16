use serde::{Deserialize, Serialize};

use super::camera::{project_box, CameraModel};
use crate::audiosynth::EngineSoundParams;
use crate::error::{Error, Result};
use crate::types::{PixelBox, Status};

pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Ground speed (m/s) above which a vehicle counts as moving.
pub const V_STOP: f64 = 0.1;

/// Microphone spacing along the roadside of the reference deployment (meters).
pub const MIC_SPACING: f64 = 2.6;
pub const DEFAULT_MIC_COUNT: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicPose {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    /// Direction the capsule faces, degrees from world +x. 90 points across the lanes.
    #[serde(default = "default_facing")]
    pub facing_deg: f64,
}

fn default_facing() -> f64 {
    90.0
}

impl MicPose {
    /// Evenly spaced microphones on the roadside line `y = 0`.
    pub fn roadside_row(count: usize, spacing: f64) -> Vec<MicPose> {
        (0..count)
            .map(|i| MicPose {
                id: i as u32,
                x: i as f64 * spacing,
                y: 0.0,
                facing_deg: default_facing(),
            })
            .collect()
    }

    pub fn facing(&self) -> (f64, f64) {
        let r = self.facing_deg.to_radians();
        (r.cos(), r.sin())
    }
}

/// Road rectangle in world meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneGeometry {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for LaneGeometry {
    fn default() -> Self {
        Self {
            x_min: -3.0,
            x_max: 16.0,
            y_min: 1.0,
            y_max: 8.0,
        }
    }
}

impl LaneGeometry {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_max, self.y_max),
            (self.x_min, self.y_max),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Powertrain {
    Combustion,
    Electric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineEvent {
    pub t: f64,
    pub engine_on: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub length: f64,
    pub width: f64,
}

impl Default for Footprint {
    fn default() -> Self {
        Self {
            length: 4.5,
            width: 1.8,
        }
    }
}

/// Kinematic state of a vehicle at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    pub engine_on: bool,
}

impl VehicleState {
    pub fn is_moving(&self) -> bool {
        self.speed > V_STOP
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTrack {
    pub id: u32,
    /// Piecewise-linear trajectory. The vehicle exists for `t` in `[path[0].t, path[last].t]`.
    pub path: Vec<Waypoint>,
    /// Engine switch events; the engine is off before the first event.
    #[serde(default)]
    pub engine_timeline: Vec<EngineEvent>,
    pub powertrain: Powertrain,
    #[serde(default)]
    pub footprint: Footprint,
    #[serde(default)]
    pub engine_params: Option<EngineSoundParams>,
}

impl VehicleTrack {
    pub fn present_at(&self, t: f64) -> bool {
        match (self.path.first(), self.path.last()) {
            (Some(a), Some(b)) => t >= a.t && t <= b.t,
            _ => false,
        }
    }

    /// Index of the segment governing time `t` (right-continuous at breakpoints).
    fn segment_at(&self, t: f64) -> usize {
        let n = self.path.len();
        // first index whose start time is > t, minus one
        let i = self.path.partition_point(|w| w.t <= t);
        i.saturating_sub(1).min(n.saturating_sub(2))
    }

    /// Position and speed at `t`, or `None` while the vehicle is absent.
    pub fn kinematics_at(&self, t: f64) -> Option<(f64, f64, f64)> {
        if !self.present_at(t) || self.path.len() < 2 {
            return None;
        }
        let i = self.segment_at(t);
        let (a, b) = (self.path[i], self.path[i + 1]);
        let dt = b.t - a.t;
        let s = ((t - a.t) / dt).clamp(0.0, 1.0);
        let x = a.x + s * (b.x - a.x);
        let y = a.y + s * (b.y - a.y);
        let speed = (b.x - a.x).hypot(b.y - a.y) / dt;
        Some((x, y, speed))
    }

    /// Engine state at `t`; switch events take effect at their timestamp.
    pub fn engine_on_at(&self, t: f64) -> bool {
        if self.powertrain == Powertrain::Electric {
            return false;
        }
        let i = self.engine_timeline.partition_point(|e| e.t <= t);
        i > 0 && self.engine_timeline[i - 1].engine_on
    }

    pub fn state_at(&self, t: f64) -> Option<VehicleState> {
        self.kinematics_at(t).map(|(x, y, speed)| VehicleState {
            x,
            y,
            speed,
            engine_on: self.engine_on_at(t),
        })
    }

    pub fn status_at(&self, t: f64) -> Option<Status> {
        self.state_at(t).map(|s| status_of(&s))
    }

    /// Ground footprint corners (lane-aligned) around a centre point.
    pub fn footprint_corners(&self, x: f64, y: f64) -> [(f64, f64); 4] {
        let (hl, hw) = (0.5 * self.footprint.length, 0.5 * self.footprint.width);
        [(x - hl, y - hw), (x + hl, y - hw), (x + hl, y + hw), (x - hl, y + hw)]
    }

    pub fn box_at(&self, camera: &CameraModel, t: f64) -> Result<Option<PixelBox>> {
        match self.kinematics_at(t) {
            Some((x, y, _)) => project_box(camera, &self.footprint_corners(x, y)),
            None => Ok(None),
        }
    }

    fn validate(&self, duration: f64, lane: &LaneGeometry) -> Result<()> {
        let id = self.id;
        if self.path.len() < 2 {
            return Err(Error::config(format!("vehicle {id}: path needs at least 2 waypoints")));
        }
        for w in &self.path {
            if !(w.t.is_finite() && w.x.is_finite() && w.y.is_finite()) {
                return Err(Error::config(format!("vehicle {id}: non-finite waypoint")));
            }
            // the lane is convex, so checking the vertices covers the segments
            if !lane.contains(w.x, w.y) {
                return Err(Error::config(format!(
                    "vehicle {id}: waypoint ({}, {}) outside lane geometry",
                    w.x, w.y
                )));
            }
        }
        if self.path.windows(2).any(|p| p[1].t <= p[0].t) {
            return Err(Error::config(format!("vehicle {id}: path times must increase strictly")));
        }
        if self.engine_timeline.windows(2).any(|p| p[1].t <= p[0].t) {
            return Err(Error::config(format!(
                "vehicle {id}: engine_timeline times must increase strictly"
            )));
        }
        if self.engine_timeline.iter().any(|e| e.t < 0.0 || e.t > duration) {
            return Err(Error::config(format!(
                "vehicle {id}: engine event outside [0, duration]"
            )));
        }
        let any_on = self.engine_timeline.iter().any(|e| e.engine_on);
        match self.powertrain {
            Powertrain::Electric if any_on => {
                return Err(Error::config(format!(
                    "vehicle {id}: electric vehicles cannot switch an engine on"
                )))
            }
            Powertrain::Combustion if any_on => match &self.engine_params {
                Some(p) => p.validate(crate::SAMPLE_RATE)?,
                None => {
                    return Err(Error::config(format!(
                        "vehicle {id}: combustion vehicle needs engine_params"
                    )))
                }
            },
            _ => {}
        }
        if !(self.footprint.length > 0.0 && self.footprint.width > 0.0) {
            return Err(Error::config(format!("vehicle {id}: footprint must be positive")));
        }
        Ok(())
    }
}

/// Status rule: moving above `V_STOP`, otherwise idling iff the engine runs.
pub fn status_of(state: &VehicleState) -> Status {
    if state.is_moving() {
        Status::Moving
    } else if state.engine_on {
        Status::Idling
    } else {
        Status::Off
    }
}

/// A scripted drop-off zone: vehicles, microphones and camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub duration: f64,
    #[serde(default = "default_fps")]
    pub fps: f64,
    pub seed: u64,
    #[serde(default)]
    pub vehicles: Vec<VehicleTrack>,
    pub mics: Vec<MicPose>,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub lane_geometry: LaneGeometry,
}

fn schema_version() -> u32 {
    SCENARIO_SCHEMA_VERSION
}

fn default_fps() -> f64 {
    25.0
}

impl ScenarioSpec {
    /// Empty scene with the reference geometry: six roadside microphones 2.6 m apart.
    pub fn empty(duration: f64, seed: u64) -> Self {
        Self {
            schema_version: SCENARIO_SCHEMA_VERSION,
            duration,
            fps: default_fps(),
            seed,
            vehicles: Vec::new(),
            mics: MicPose::roadside_row(DEFAULT_MIC_COUNT, MIC_SPACING),
            camera: CameraModel::default(),
            lane_geometry: LaneGeometry::default(),
        }
    }

    pub fn n_frames(&self) -> usize {
        (self.duration * self.fps - 1e-9).ceil().max(0.0) as usize
    }

    pub fn frame_time(&self, frame_index: usize) -> f64 {
        frame_index as f64 / self.fps
    }

    pub fn frame_at(&self, t: f64) -> usize {
        (t * self.fps).round().max(0.0) as usize
    }

    pub fn check_frame(&self, frame_index: usize) -> Result<()> {
        let len = self.n_frames();
        if frame_index >= len {
            return Err(Error::Range {
                index: frame_index,
                len,
            });
        }
        Ok(())
    }

    pub fn vehicle(&self, id: u32) -> Option<&VehicleTrack> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    /// Pixel location of every microphone, in microphone order.
    pub fn mic_pixels(&self) -> Result<Vec<(u32, f64, f64)>> {
        self.mics
            .iter()
            .map(|m| self.camera.project(m.x, m.y).map(|(u, v)| (m.id, u, v)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCENARIO_SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported scenario schema_version {}",
                self.schema_version
            )));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::config("duration must be > 0"));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::config("fps must be > 0"));
        }
        if self.mics.is_empty() {
            return Err(Error::config("at least one microphone is required"));
        }
        if self.mics.windows(2).any(|m| m[1].x <= m[0].x) {
            return Err(Error::config(
                "microphone positions must increase strictly along the roadside",
            ));
        }
        let mut ids: Vec<u32> = self.mics.iter().map(|m| m.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("microphone ids must be unique"));
        }
        self.camera.validate()?;
        let lane = &self.lane_geometry;
        if !(lane.x_min < lane.x_max && lane.y_min < lane.y_max) {
            return Err(Error::config("lane geometry is empty"));
        }
        for (x, y) in lane.corners() {
            let (u, v) = self.camera.project(x, y)?;
            if !self.camera.contains(u, v) {
                return Err(Error::config(format!(
                    "lane corner ({x}, {y}) projects outside the image"
                )));
            }
        }
        let mut vids: Vec<u32> = self.vehicles.iter().map(|v| v.id).collect();
        vids.sort_unstable();
        if vids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("vehicle ids must be unique"));
        }
        for v in &self.vehicles {
            v.validate(self.duration, lane)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(path: &[(f64, f64, f64)], events: &[(f64, bool)], powertrain: Powertrain) -> VehicleTrack {
        VehicleTrack {
            id: 1,
            path: path.iter().map(|&(t, x, y)| Waypoint { t, x, y }).collect(),
            engine_timeline: events.iter().map(|&(t, engine_on)| EngineEvent { t, engine_on }).collect(),
            powertrain,
            footprint: Footprint::default(),
            engine_params: Some(EngineSoundParams::default()),
        }
    }

    #[test]
    fn piecewise_linear_kinematics() {
        let v = track(&[(0.0, 0.0, 2.0), (2.0, 10.0, 2.0), (5.0, 10.0, 2.0)], &[], Powertrain::Combustion);
        let (x, y, s) = v.kinematics_at(1.0).unwrap();
        assert_eq!((x, y, s), (5.0, 2.0, 5.0));
        // breakpoint uses the segment that starts there
        assert_eq!(v.kinematics_at(2.0).unwrap().2, 0.0);
        assert!(v.kinematics_at(5.5).is_none());
    }

    #[test]
    fn engine_switches_are_right_continuous() {
        let v = track(&[(0.0, 0.0, 2.0), (9.0, 0.0, 2.0)], &[(1.0, true), (4.0, false)], Powertrain::Combustion);
        assert!(!v.engine_on_at(0.999));
        assert!(v.engine_on_at(1.0));
        assert!(v.engine_on_at(3.999));
        assert!(!v.engine_on_at(4.0));
        assert_eq!(v.status_at(2.0), Some(Status::Idling));
        assert_eq!(v.status_at(5.0), Some(Status::Off));
    }

    #[test]
    fn electric_vehicles_reject_engine_on() {
        let mut s = ScenarioSpec::empty(10.0, 1);
        s.vehicles.push(track(&[(0.0, 0.0, 2.0), (9.0, 0.0, 2.0)], &[(1.0, true)], Powertrain::Electric));
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn validation_catches_bad_geometry() {
        let mut s = ScenarioSpec::empty(10.0, 1);
        s.validate().unwrap();
        s.mics[2].x = s.mics[1].x;
        assert!(s.validate().is_err());

        let mut s = ScenarioSpec::empty(10.0, 1);
        s.vehicles.push(track(&[(0.0, 0.0, 20.0), (9.0, 0.0, 2.0)], &[], Powertrain::Combustion));
        assert!(s.validate().is_err());

        let mut s = ScenarioSpec::empty(0.0, 1);
        assert!(s.validate().is_err());
        s.duration = 5.0;
        s.mics.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn frame_count() {
        let s = ScenarioSpec::empty(60.0, 1);
        assert_eq!(s.n_frames(), 1500);
        assert!(s.check_frame(1499).is_ok());
        assert!(matches!(s.check_frame(1500), Err(Error::Range { .. })));
    }
}
