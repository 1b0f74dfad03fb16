//! Random drop-off scripts: vehicles pull into roadside slots, idle or switch
//! off for a while, then leave; some traffic just drives through.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{EngineEvent, Footprint, Powertrain, ScenarioSpec, VehicleTrack, Waypoint};
use crate::audiosynth::EngineSoundParams;
use crate::error::{Error, Result};
use crate::rng;

/// Lane centre lines (world y, meters).
pub const NEAR_LANE_Y: f64 = 2.5;
pub const FAR_LANE_Y: f64 = 6.0;
/// Drop-off slots in the near lane, in front of every other microphone.
pub const SLOTS: [f64; 3] = [0.0, 5.2, 10.4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScriptParams {
    pub duration: f64,
    pub min_vehicles: usize,
    pub max_vehicles: usize,
    pub electric_fraction: f64,
    /// Probability that a slot vehicle is already parked at t = 0.
    pub parked_at_start_prob: f64,
    /// Minimum time between engine switches while parked, seconds.
    pub min_engine_segment: f64,
}

impl Default for ScriptParams {
    fn default() -> Self {
        Self {
            duration: 300.0,
            min_vehicles: 1,
            max_vehicles: 4,
            electric_fraction: 0.25,
            parked_at_start_prob: 0.3,
            min_engine_segment: 15.0,
        }
    }
}

impl ScriptParams {
    pub fn with_duration(duration: f64) -> Self {
        Self {
            duration,
            ..Self::default()
        }
    }
}

/// A scenario drawn from `params`, fully determined by `seed`.
pub fn scripted_scenario(seed: u64, params: &ScriptParams) -> Result<ScenarioSpec> {
    if !(params.duration > 0.0) {
        return Err(Error::config("duration must be > 0"));
    }
    if params.min_vehicles > params.max_vehicles || params.max_vehicles > SLOTS.len() + 1 {
        return Err(Error::config(format!(
            "vehicle count range must lie within 0..={}",
            SLOTS.len() + 1
        )));
    }
    let mut r = rng::stream(seed, &[rng::tag("script")]);
    let mut spec = ScenarioSpec::empty(params.duration, seed);
    let lane = spec.lane_geometry;

    let n = r.random_range(params.min_vehicles..=params.max_vehicles);
    let n_parked = if n > SLOTS.len() {
        SLOTS.len()
    } else if n >= 2 && r.random_bool(0.3) {
        n - 1
    } else {
        n
    };
    let mut slots = SLOTS.to_vec();
    slots.shuffle(&mut r);

    let mut next_id = 1u32;
    for &slot in slots.iter().take(n_parked) {
        let v = parked_vehicle(next_id, slot, params, lane.x_min, lane.x_max, &mut r);
        next_id += 1;
        if let Some(v) = v {
            spec.vehicles.push(v);
        }
    }
    for _ in n_parked..n {
        let v = through_vehicle(next_id, params, lane.x_min, lane.x_max, &mut r);
        next_id += 1;
        if let Some(v) = v {
            spec.vehicles.push(v);
        }
    }
    spec.validate()?;
    Ok(spec)
}

fn new_track<R: Rng>(id: u32, electric: bool, r: &mut R) -> VehicleTrack {
    VehicleTrack {
        id,
        path: Vec::new(),
        engine_timeline: Vec::new(),
        powertrain: if electric { Powertrain::Electric } else { Powertrain::Combustion },
        footprint: Footprint {
            length: r.random_range(4.2..5.2),
            width: r.random_range(1.7..2.0),
        },
        engine_params: (!electric).then(|| EngineSoundParams::random(r)),
    }
}

fn parked_vehicle<R: Rng>(
    id: u32,
    slot: f64,
    params: &ScriptParams,
    x_start: f64,
    x_end: f64,
    r: &mut R,
) -> Option<VehicleTrack> {
    let electric = r.random_bool(params.electric_fraction);
    let mut v = new_track(id, electric, r);
    let speed = r.random_range(3.0..5.0);
    let mut path = Vec::new();
    let mut events = Vec::new();

    let engine_initially_on;
    let t_stop = if r.random_bool(params.parked_at_start_prob) {
        path.push(Waypoint { t: 0.0, x: slot, y: NEAR_LANE_Y });
        engine_initially_on = r.random_bool(0.5);
        if engine_initially_on && !electric {
            events.push(EngineEvent { t: 0.0, engine_on: true });
        }
        0.0
    } else {
        let t_arr = r.random_range(1.0..(0.4 * params.duration).clamp(1.5, 120.0));
        path.push(Waypoint { t: t_arr, x: x_start, y: FAR_LANE_Y });
        if !electric {
            events.push(EngineEvent { t: t_arr, engine_on: true });
        }
        engine_initially_on = true;
        let mut t = t_arr;
        let turn_x = slot - 3.0;
        if turn_x > x_start + 1e-9 {
            t += (turn_x - x_start) / speed;
            path.push(Waypoint { t, x: turn_x, y: FAR_LANE_Y });
        }
        t += 2.0;
        path.push(Waypoint { t, x: slot, y: NEAR_LANE_Y });
        t
    };

    let dwell = r.random_range(60.0..180.0);
    let t_leave = t_stop + dwell;
    path.push(Waypoint { t: t_leave, x: slot, y: NEAR_LANE_Y });
    let mut t = t_leave + 2.0;
    let merge_x = (slot + 3.0).min(x_end);
    path.push(Waypoint { t, x: merge_x, y: FAR_LANE_Y });
    if x_end > merge_x + 1e-9 {
        t += (x_end - merge_x) / speed;
        path.push(Waypoint { t, x: x_end, y: FAR_LANE_Y });
    }

    if !electric {
        let mut on = engine_initially_on;
        let mut cursor = t_stop;
        let keeps_state = r.random_bool(0.25);
        if !keeps_state {
            loop {
                let seg = r.random_range(params.min_engine_segment..(params.min_engine_segment + 75.0));
                let next = cursor + seg;
                if next > t_leave - 25.0 {
                    break;
                }
                on = !on;
                events.push(EngineEvent { t: next, engine_on: on });
                cursor = next;
            }
        }
        if !on {
            events.push(EngineEvent { t: t_leave - 8.0, engine_on: true });
        }
    }
    v.path = path;
    v.engine_timeline = events;
    truncate(v, params.duration)
}

fn through_vehicle<R: Rng>(
    id: u32,
    params: &ScriptParams,
    x_start: f64,
    x_end: f64,
    r: &mut R,
) -> Option<VehicleTrack> {
    let electric = r.random_bool(params.electric_fraction);
    let mut v = new_track(id, electric, r);
    let speed = r.random_range(3.0..6.0);
    let t_enter = r.random_range(0.0..(params.duration - 8.0).max(0.5));
    v.path = vec![
        Waypoint { t: t_enter, x: x_start, y: FAR_LANE_Y },
        Waypoint { t: t_enter + (x_end - x_start) / speed, x: x_end, y: FAR_LANE_Y },
    ];
    if !electric {
        v.engine_timeline.push(EngineEvent { t: t_enter, engine_on: true });
    }
    truncate(v, params.duration)
}

/// Cuts the path and timeline at `duration`; drops vehicles that never appear.
fn truncate(mut v: VehicleTrack, duration: f64) -> Option<VehicleTrack> {
    v.engine_timeline.retain(|e| e.t <= duration);
    if v.path.last().is_some_and(|w| w.t > duration) {
        let (x, y, _) = v.kinematics_at(duration)?;
        v.path.retain(|w| w.t < duration);
        v.path.push(Waypoint { t: duration, x, y });
    }
    (v.path.len() >= 2).then_some(v)
}
