use ndarray::Array2;

use super::classifier::{decide, LatentClassifier};
use super::encoder::Encoder;
use crate::dsp::{Spectrogram, Stft, StftConfig};
use crate::error::{Error, Result};
use crate::types::AudioLabel;

/// Frozen encoder plus latent classifier: a complete window classifier.
#[derive(Debug, Clone)]
pub struct AudioModel {
    pub encoder: Encoder,
    pub classifier: LatentClassifier,
    pub threshold: f64,
    stft: Stft,
}

impl AudioModel {
    pub fn new(encoder: Encoder, classifier: LatentClassifier, threshold: f64, stft: StftConfig) -> Result<Self> {
        if classifier.net.n_in() != encoder.config.proj_dim {
            return Err(Error::config("classifier input size differs from the encoder latent size"));
        }
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::config("threshold must lie in [0, 1]"));
        }
        Ok(Self {
            encoder,
            classifier,
            threshold,
            stft: Stft::new(stft)?,
        })
    }

    pub fn stft_config(&self) -> &StftConfig {
        self.stft.config()
    }

    /// Pooled encoder input for a raw audio segment.
    pub fn features(&self, segment: &[f32]) -> Result<Vec<f64>> {
        let spec = self.stft.magnitude(segment)?;
        self.encoder.features(&spec)
    }

    /// Foreground probabilities for rows of pooled features.
    pub fn score_features(&self, x: &Array2<f64>) -> Vec<f64> {
        self.classifier.scores(&self.encoder.latents(x))
    }

    pub fn classify_segment(&self, segment: &[f32]) -> Result<(AudioLabel, f64)> {
        let f = self.features(segment)?;
        let x = Array2::from_shape_vec((1, f.len()), f).map_err(|e| Error::data(e.to_string()))?;
        let s = self.score_features(&x)[0];
        Ok((decide(s, self.threshold), s))
    }
}

/// Encodes `spec`, scores its latent and thresholds the score.
pub fn classify(
    spec: &Spectrogram,
    encoder: &Encoder,
    classifier: &LatentClassifier,
    threshold: f64,
) -> Result<(AudioLabel, f64)> {
    let (_, z) = encoder.encode(spec)?;
    let x = Array2::from_shape_vec((1, z.len()), z).map_err(|e| Error::data(e.to_string()))?;
    let s = classifier.scores(&x)[0];
    Ok((decide(s, threshold), s))
}
