use serde::{Deserialize, Serialize};

use super::matching::ScoredBox;
use crate::types::Status;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: u32,
    pub points: Vec<TrajectoryPoint>,
}

/// Boxes observed at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedBoxes {
    pub t: f64,
    pub boxes: Vec<ScoredBox>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    /// Gate as a multiple of the median box diagonal.
    pub gate_factor: f64,
    /// Ticks a track may go unobserved before it is closed.
    pub max_gap: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            gate_factor: 0.5,
            max_gap: 2,
        }
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Links boxes across ticks by nearest centroid inside a distance gate.
/// Pairs are assigned greedily in order of increasing distance (ties by track
/// id, then box index); leftover boxes open new tracks.
pub fn reconstruct_trajectories(stream: &[TimedBoxes], cfg: &TrackerConfig) -> Vec<Trajectory> {
    let gate = cfg.gate_factor * median(stream.iter().flat_map(|f| f.boxes.iter().map(|b| b.bbox.diagonal())).collect());
    let mut tracks: Vec<Trajectory> = Vec::new();
    // (track index, ticks since last observation)
    let mut active: Vec<(usize, usize)> = Vec::new();
    for frame in stream {
        let mut pairs = Vec::new();
        for (ai, &(ti, _)) in active.iter().enumerate() {
            let last = tracks[ti].points.last().expect("tracks start with a point");
            for (bi, b) in frame.boxes.iter().enumerate() {
                let (x, y) = b.bbox.centroid();
                let d = (x - last.x).hypot(y - last.y);
                if d <= gate {
                    pairs.push((d, ai, bi));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut track_used = vec![false; active.len()];
        let mut box_used = vec![false; frame.boxes.len()];
        let point = |b: &ScoredBox| {
            let (x, y) = b.bbox.centroid();
            TrajectoryPoint {
                t: frame.t,
                x,
                y,
                status: b.class,
            }
        };
        for (_, ai, bi) in pairs {
            if track_used[ai] || box_used[bi] {
                continue;
            }
            track_used[ai] = true;
            box_used[bi] = true;
            tracks[active[ai].0].points.push(point(&frame.boxes[bi]));
        }
        let mut next_active = Vec::new();
        for (ai, &(ti, gap)) in active.iter().enumerate() {
            if track_used[ai] {
                next_active.push((ti, 0));
            } else if gap < cfg.max_gap {
                next_active.push((ti, gap + 1));
            }
        }
        for (bi, b) in frame.boxes.iter().enumerate() {
            if !box_used[bi] {
                tracks.push(Trajectory {
                    id: tracks.len() as u32,
                    points: vec![point(b)],
                });
                next_active.push((tracks.len() - 1, 0));
            }
        }
        active = next_active;
    }
    tracks
}
