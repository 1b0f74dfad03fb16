//! Experiment persistence: labelled datasets, splits and manifests.

mod dataset;
mod features;
mod manifest;
mod split;

pub use dataset::{balance_refs, build_audio_dataset, label_counts, AudioSampleRef, DatasetConfig, DEFAULT_STRIDE_S};
pub use features::{decode_features, encode_features, read_features};
pub use manifest::{content_hash, Experiment, ExperimentLock, ExperimentManifest, FileRef, LOCK_FILE, MANIFEST_FILE, MANIFEST_VERSION};
pub use split::{largest_remainder, split, split_refs, DatasetSplits, SplitFractions};
