//! Audio-visual idling vehicle detection.
//!
//! The crate is organised around the detection pipeline:
//!
//! ```text
//! scenesim ──► detections ─┐
//!                          ├─► fusion (nearest mic + audio classifier) ──► predictions ──► evalkit
//! audiosynth ──► audio ────┘          ▲
//!                                     └── contrastive (encoder + latent classifier) ◄── dsp
//! ```
//!
//! `datastore` persists experiments on disk and `cli` wires the stages into
//! reproducible commands.

pub mod audiosynth;
pub mod cli;
pub mod contrastive;
pub mod datastore;
pub mod dsp;
pub mod error;
pub mod evalkit;
pub mod fusion;
pub mod rng;
pub mod scenesim;
pub mod types;
pub mod workflow;

pub use error::{Error, Result};
pub use types::{AudioLabel, Detection, Motion, PixelBox, Status};

/// Microphone sample rate used throughout the pipeline.
pub const SAMPLE_RATE: u32 = 48_000;
