//! Deterministic drop-off zone simulator: vehicle tracks, camera projection,
//! per-frame ground truth and a noisy detector stream.

mod camera;
mod detector;
pub mod io;
mod scenario;
pub mod script;
mod truth;

pub use camera::{project_box, CameraModel};
pub use detector::{oracle_detections, simulate_detections, DetectorNoiseModel};
pub use scenario::{
    status_of, EngineEvent, Footprint, LaneGeometry, MicPose, Powertrain, ScenarioSpec, VehicleState,
    VehicleTrack, Waypoint, DEFAULT_MIC_COUNT, MIC_SPACING, SCENARIO_SCHEMA_VERSION, V_STOP,
};
pub use script::{scripted_scenario, ScriptParams};
pub use truth::{ground_truth_at, GroundTruthFrame, GtBox};
