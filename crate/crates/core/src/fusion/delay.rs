//! How many ticks the pipeline needs to reflect an engine switch.

use serde::{Deserialize, Serialize};

use super::tick::FramePrediction;
use crate::error::Result;
use crate::evalkit::iou;
use crate::scenesim::{ground_truth_at, ScenarioSpec};
use crate::types::Status;

const SWITCH_IOU: f64 = 0.5;
const BEFORE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDelay {
    pub vehicle_id: u32,
    pub t_switch: f64,
    pub to: Status,
    /// First tick at or after the switch.
    pub first_tick: Option<usize>,
    /// Ticks from `first_tick` until a prediction matched to the vehicle shows
    /// the new status; `None` if that never happens while the status holds.
    pub delay_ticks: Option<usize>,
}

/// Reflection delay of every engine switch made by a parked vehicle.
/// `preds` must be one entry per tick, in tick order.
pub fn switch_delays(spec: &ScenarioSpec, preds: &[FramePrediction]) -> Result<Vec<SwitchDelay>> {
    let mut out = Vec::new();
    for v in &spec.vehicles {
        for ev in &v.engine_timeline {
            let t_s = ev.t;
            let (Some(before), Some(after)) = (v.status_at(t_s - BEFORE), v.status_at(t_s)) else {
                continue;
            };
            if before == Status::Moving || after == Status::Moving || before == after {
                continue;
            }
            let first = preds.iter().position(|p| p.t >= t_s);
            let mut delay = None;
            if let Some(k0) = first {
                for (d, p) in preds[k0..].iter().enumerate() {
                    if v.status_at(p.t) != Some(after) {
                        break;
                    }
                    let gt = ground_truth_at(spec, p.frame)?;
                    let Some(g) = gt.get(v.id) else { break };
                    let best = p
                        .boxes
                        .iter()
                        .map(|b| (iou(&b.bbox(), &g.bbox), b.status))
                        .filter(|(o, _)| *o >= SWITCH_IOU)
                        .max_by(|a, b| a.0.total_cmp(&b.0));
                    if matches!(best, Some((_, s)) if s == after) {
                        delay = Some(d);
                        break;
                    }
                }
            }
            out.push(SwitchDelay {
                vehicle_id: v.id,
                t_switch: t_s,
                to: after,
                first_tick: first,
                delay_ticks: delay,
            });
        }
    }
    Ok(out)
}
