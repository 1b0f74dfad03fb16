//! Engine-sound classification: pooled-spectrogram encoder with a projection
//! onto the unit hypersphere, supervised contrastive pretraining, and a small
//! classifier on the frozen latents.

pub mod checkpoint;
mod classifier;
mod encoder;
mod loss;
mod model;
pub mod nn;
mod optim;
mod train;

pub use classifier::{decide, train_classifier, ClassifierArch, ClassifierTrainConfig, LatentClassifier, MLP_HIDDEN};
pub use encoder::{features_for, normalize_rows, pool_grid, Encoder, EncoderConfig, NORM_EPS, PROJ_DIM};
pub use loss::{bce_with_logits, scl_loss, scl_loss_grad, sigmoid, DEFAULT_TEMPERATURE};
pub use model::{classify, AudioModel};
pub use optim::Adam;
pub use train::{train_encoder, train_supervised, TrainConfig, TrainReport};
