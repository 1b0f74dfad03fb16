use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::classifier::{ClassifierArch, LatentClassifier};
use super::encoder::{Encoder, EncoderConfig};
use super::loss::{scl_loss_grad, DEFAULT_TEMPERATURE};
use super::optim::Adam;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub temperature: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            batch_size: 128,
            temperature: DEFAULT_TEMPERATURE,
            epochs: 40,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::config("lr must be >= 0"));
        }
        if self.batch_size < 2 {
            return Err(Error::config("batch_size must be >= 2"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::config(format!("temperature must be > 0, got {}", self.temperature)));
        }
        Ok(())
    }
}

/// Per-step loss values of a training run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
}

fn check_dataset(features: &Array2<f64>, labels: &[usize], n_in: usize) -> Result<()> {
    if features.nrows() != labels.len() {
        return Err(Error::config("feature/label count mismatch"));
    }
    if features.ncols() != n_in {
        return Err(Error::config(format!(
            "features have {} columns, encoder expects {n_in}",
            features.ncols()
        )));
    }
    let first = labels.first().copied();
    if first.is_none() || labels.iter().all(|&l| Some(l) == first) {
        return Err(Error::config("training data must contain at least two classes"));
    }
    Ok(())
}

fn all_finite(grads: &[Vec<f64>]) -> bool {
    grads.iter().flatten().all(|g| g.is_finite())
}

/// Shuffled mini-batches per epoch; a trailing batch smaller than 2 is dropped.
fn for_each_batch(
    n: usize,
    cfg: &TrainConfig,
    mut step: impl FnMut(usize, &[usize]) -> Result<f64>,
) -> Result<TrainReport> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut report = TrainReport::default();
    for epoch in 0..cfg.epochs {
        let mut r = rng::stream(cfg.seed, &[rng::tag("batches"), epoch as u64]);
        order.shuffle(&mut r);
        for chunk in order.chunks(cfg.batch_size) {
            if chunk.len() < 2 {
                continue;
            }
            let loss = step(report.loss_trace.len(), chunk)?;
            if !loss.is_finite() {
                return Err(Error::NanLoss {
                    step: report.loss_trace.len(),
                    batch: chunk.to_vec(),
                });
            }
            report.loss_trace.push(loss);
        }
    }
    Ok(report)
}

/// Supervised-contrastive pretraining of encoder and projector.
pub fn train_encoder(
    features: &Array2<f64>,
    labels: &[usize],
    enc_cfg: &EncoderConfig,
    cfg: &TrainConfig,
) -> Result<(Encoder, TrainReport)> {
    cfg.validate()?;
    let mut enc = Encoder::new(enc_cfg.clone(), cfg.seed)?;
    check_dataset(features, labels, enc_cfg.pooled_len())?;
    let mut opt = Adam::new(cfg.lr);
    let report = for_each_batch(labels.len(), cfg, |_, batch| {
        let x = features.select(Axis(0), batch);
        let y: Vec<usize> = batch.iter().map(|&i| labels[i]).collect();
        let (z, cache) = enc.forward_cached(&x);
        let (loss, dz) = scl_loss_grad(&z, &y, cfg.temperature)?;
        if !loss.is_finite() {
            return Ok(f64::NAN);
        }
        let grads = enc.backward(&cache, &dz);
        if !all_finite(&grads) {
            return Ok(f64::NAN);
        }
        opt.step(enc.tensors_mut(), &grads);
        Ok(loss)
    })?;
    enc.round_to_f32();
    Ok((enc, report))
}

/// End-to-end supervised baseline: the same encoder with a classifier head on
/// its latents, trained jointly on binary cross-entropy.
pub fn train_supervised(
    features: &Array2<f64>,
    labels: &[usize],
    enc_cfg: &EncoderConfig,
    arch: ClassifierArch,
    cfg: &TrainConfig,
) -> Result<(Encoder, LatentClassifier, TrainReport)> {
    cfg.validate()?;
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::config("supervised baseline labels must be 0 or 1"));
    }
    let mut enc = Encoder::new(enc_cfg.clone(), cfg.seed)?;
    let mut head = LatentClassifier::new(arch, enc_cfg.proj_dim, cfg.seed);
    check_dataset(features, labels, enc_cfg.pooled_len())?;
    let mut opt = Adam::new(cfg.lr);
    let report = for_each_batch(labels.len(), cfg, |_, batch| {
        let x = features.select(Axis(0), batch);
        let y: Vec<f64> = batch.iter().map(|&i| labels[i] as f64).collect();
        let (z, cache) = enc.forward_cached(&x);
        let (loss, g_head, dz) = head.loss_grad(&z, &y);
        if !loss.is_finite() {
            return Ok(f64::NAN);
        }
        let mut grads = enc.backward(&cache, &dz);
        grads.extend(g_head);
        if !all_finite(&grads) {
            return Ok(f64::NAN);
        }
        let mut params = enc.tensors_mut();
        params.extend(head.net.tensors_mut());
        opt.step(params, &grads);
        Ok(loss)
    })?;
    enc.round_to_f32();
    head.net.round_to_f32();
    Ok((enc, head, report))
}
