use serde::{Deserialize, Serialize};

use crate::audiosynth::{CutoutModel, MixOptions};
use crate::contrastive::{ClassifierArch, ClassifierTrainConfig, EncoderConfig, TrainConfig};
use crate::datastore::{DatasetConfig, SplitFractions};
use crate::dsp::StftConfig;
use crate::error::{Error, Result};
use crate::evalkit::EvalConfig;
use crate::fusion::TickConfig;
use crate::scenesim::{DetectorNoiseModel, ScriptParams};

/// How scenarios are drawn and rendered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub script: ScriptParams,
    /// Ambient bed and nuisance events are drawn per scenario; `false` renders without them.
    pub noise: bool,
    pub cutout: CutoutModel,
    pub mix: MixOptions,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            script: ScriptParams::default(),
            noise: true,
            cutout: CutoutModel::default(),
            mix: MixOptions::default(),
        }
    }
}

/// Scenes rendered by `build-dataset` to train on. The experiment's own
/// scenario is never trained on unless `scenes` is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingSetConfig {
    pub scenes: usize,
    /// Scene length in seconds; `None` uses the world's duration.
    pub duration: Option<f64>,
}

impl Default for TrainingSetConfig {
    fn default() -> Self {
        Self {
            scenes: 6,
            duration: None,
        }
    }
}

/// Every knob of an experiment. Missing sections take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Master seed used when an experiment is created.
    pub seed: u64,
    pub world: WorldConfig,
    pub detector: DetectorNoiseModel,
    /// Use ground-truth boxes instead of the noisy detector.
    pub oracle_detector: bool,
    pub training: TrainingSetConfig,
    pub dataset: DatasetConfig,
    pub split: SplitFractions,
    pub stft: StftConfig,
    pub encoder: EncoderConfig,
    pub train: TrainConfig,
    pub classifier_arch: ClassifierArch,
    pub classifier: ClassifierTrainConfig,
    pub threshold: f64,
    pub tick: TickConfig,
    pub eval: EvalConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            world: WorldConfig::default(),
            detector: DetectorNoiseModel::default(),
            oracle_detector: false,
            training: TrainingSetConfig::default(),
            dataset: DatasetConfig::default(),
            split: SplitFractions::default(),
            stft: StftConfig::default(),
            encoder: EncoderConfig::default(),
            train: TrainConfig::default(),
            classifier_arch: ClassifierArch::Mlp,
            classifier: ClassifierTrainConfig::default(),
            threshold: 0.5,
            tick: TickConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// World used for the training scenes.
    pub fn training_world(&self) -> WorldConfig {
        let mut w = self.world.clone();
        if let Some(d) = self.training.duration {
            w.script.duration = d;
        }
        w
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.world.script.duration > 0.0) {
            return Err(Error::config(format!(
                "world.script.duration: must be > 0, got {}",
                self.world.script.duration
            )));
        }
        if let Some(d) = self.training.duration {
            if !(d > 0.0) {
                return Err(Error::config(format!("training.duration: must be > 0, got {d}")));
            }
        }
        self.world.cutout.validate()?;
        self.detector.validate()?;
        self.dataset.validate()?;
        self.stft.validate()?;
        self.encoder.validate()?;
        self.train.validate()?;
        self.tick.validate()?;
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config("threshold: must lie in [0, 1]"));
        }
        let expected = self
            .stft
            .n_frames(crate::dsp::window_samples(self.tick.window_s, crate::SAMPLE_RATE))
            .map(|t| (t, self.stft.n_bins()));
        if expected != Some(self.encoder.input_dims) {
            return Err(Error::config(format!(
                "encoder.input_dims {:?} does not match the {} s window spectrogram {:?}",
                self.encoder.input_dims, self.tick.window_s, expected
            )));
        }
        Ok(())
    }

    /// Reads a JSON config; absent fields keep their defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }
}
