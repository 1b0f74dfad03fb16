//! Detection scoring (IOU, greedy matching, interpolated AP, mAP), the audio
//! stage F-score, latency summaries and trajectory reconstruction.

mod ap;
pub mod export;
mod matching;
mod report;
mod trajectory;

pub use ap::{average_precision, f_score, pr_points, Interpolation, PrCurve};
pub use matching::{iou, match_detections, FrameMatch, MatchConfig, ScoredBox};
pub use report::{
    evaluate, percentile, summarize_latency, AudioStageReport, ClassStats, EvalConfig, EvalFrame, EvalReport,
    LatencySummary, ThresholdReport,
};
pub use trajectory::{reconstruct_trajectories, TimedBoxes, TrackerConfig, Trajectory, TrajectoryPoint};
