//! Audio-visual fusion: stationary vehicles take their status from the
//! audio classifier run on the nearest microphone.

mod delay;
mod micmap;
mod stream;
mod tick;

pub use delay::{switch_delays, SwitchDelay};
pub use micmap::{nearest_mic, MicPixel, MicPixelMap};
pub use stream::{
    replay, run_stream, tick_schedule, DetectionSource, RecordedDetections, RunMode, ScenarioDetections,
    StreamSummary, Tick,
};
pub use tick::{fuse_tick, FramePrediction, PredBox, TickConfig, WindowClassifier};
