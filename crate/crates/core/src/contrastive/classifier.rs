use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::loss::{bce_with_logits, sigmoid};
use super::nn::{Activation, Mlp};
use super::optim::Adam;
use crate::error::{Error, Result};
use crate::rng;
use crate::types::AudioLabel;

/// Hidden width of the two-layer perceptron head.
pub const MLP_HIDDEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierArch {
    Linear,
    /// One hidden layer of 32 ReLU units.
    Mlp,
}

/// Foreground/background scorer on latent vectors (one logit output).
#[derive(Debug, Clone, PartialEq)]
pub struct LatentClassifier {
    pub arch: ClassifierArch,
    pub net: Mlp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierTrainConfig {
    pub lr: f64,
    pub epochs: usize,
    /// 0 means full batch.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for ClassifierTrainConfig {
    fn default() -> Self {
        Self {
            lr: 1e-2,
            epochs: 300,
            batch_size: 256,
            seed: 0,
        }
    }
}

impl LatentClassifier {
    pub fn new(arch: ClassifierArch, n_in: usize, seed: u64) -> Self {
        let mut r = rng::stream(seed, &[rng::tag("classifier-init")]);
        let sizes: Vec<usize> = match arch {
            ClassifierArch::Linear => vec![n_in, 1],
            ClassifierArch::Mlp => vec![n_in, MLP_HIDDEN, 1],
        };
        Self {
            arch,
            net: Mlp::init(&sizes, Activation::Identity, &mut r),
        }
    }

    pub fn logits(&self, x: &Array2<f64>) -> Vec<f64> {
        self.net.forward(x).column(0).to_vec()
    }

    /// Foreground probabilities.
    pub fn scores(&self, x: &Array2<f64>) -> Vec<f64> {
        self.logits(x).into_iter().map(sigmoid).collect()
    }

    /// Mean BCE over the rows of `x` plus gradients for the parameters and for `x`.
    pub fn loss_grad(&self, x: &Array2<f64>, targets: &[f64]) -> (f64, Vec<Vec<f64>>, Array2<f64>) {
        let (out, cache) = self.net.forward_cached(x);
        let (loss, dlogits) = bce_with_logits(&out.column(0).to_vec(), targets);
        let d = Array2::from_shape_vec((x.nrows(), 1), dlogits).expect("one logit per row");
        let (grads, dx) = self.net.backward(&cache, &d);
        (loss, grads, dx)
    }
}

/// Foreground iff `score >= threshold`.
pub fn decide(score: f64, threshold: f64) -> AudioLabel {
    if score >= threshold {
        AudioLabel::Foreground
    } else {
        AudioLabel::Background
    }
}

/// Fits a classifier on frozen latents by minimising mean BCE with Adam.
/// `labels` are 1 for foreground and 0 for background.
pub fn train_classifier(
    latents: &Array2<f64>,
    labels: &[usize],
    arch: ClassifierArch,
    cfg: &ClassifierTrainConfig,
) -> Result<(LatentClassifier, Vec<f64>)> {
    if latents.nrows() != labels.len() {
        return Err(Error::config("latent/label count mismatch"));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::config("classifier labels must be 0 or 1"));
    }
    if !(labels.contains(&0) && labels.contains(&1)) {
        return Err(Error::config("classifier training set must contain both classes"));
    }
    let mut clf = LatentClassifier::new(arch, latents.ncols(), cfg.seed);
    let mut opt = Adam::new(cfg.lr);
    let n = labels.len();
    let bs = if cfg.batch_size == 0 { n } else { cfg.batch_size.min(n) };
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        if bs < n {
            let mut r = rng::stream(cfg.seed, &[rng::tag("classifier-batches"), epoch as u64]);
            order.shuffle(&mut r);
        }
        for chunk in order.chunks(bs) {
            let x = latents.select(Axis(0), chunk);
            let y: Vec<f64> = chunk.iter().map(|&i| labels[i] as f64).collect();
            let (loss, grads, _) = clf.loss_grad(&x, &y);
            if !loss.is_finite() {
                return Err(Error::NanLoss {
                    step: opt.steps_taken() as usize,
                    batch: chunk.to_vec(),
                });
            }
            opt.step(clf.net.tensors_mut(), &grads);
            epoch_loss += loss * chunk.len() as f64;
        }
        trace.push(epoch_loss / n as f64);
    }
    clf.net.round_to_f32();
    Ok((clf, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identical_latents_score_the_prior() {
        let x = Array2::from_elem((40, 4), 0.5);
        let labels: Vec<usize> = (0..40).map(|i| usize::from(i < 10)).collect();
        let cfg = ClassifierTrainConfig {
            epochs: 400,
            ..Default::default()
        };
        for arch in [ClassifierArch::Linear, ClassifierArch::Mlp] {
            let (clf, _) = train_classifier(&x, &labels, arch, &cfg).unwrap();
            for s in clf.scores(&x) {
                assert!((s - 0.25).abs() < 0.02, "{arch:?}: {s}");
            }
        }
    }

    #[test]
    fn antipodal_clusters_are_separated() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let make = |r: &mut rand_chacha::ChaCha8Rng, n: usize| {
            let mut x = Array2::zeros((n, 8));
            let mut y = Vec::new();
            for i in 0..n {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                x[[i, 0]] = sign + r.random_range(-0.2..0.2);
                for k in 1..8 {
                    x[[i, k]] = r.random_range(-0.2..0.2);
                }
                y.push(i % 2);
            }
            (x, y)
        };
        let (xt, yt) = make(&mut r, 100);
        let (xv, yv) = make(&mut r, 100);
        let (clf, _) = train_classifier(&xt, &yt, ClassifierArch::Mlp, &ClassifierTrainConfig::default()).unwrap();
        let correct = clf
            .scores(&xv)
            .iter()
            .zip(&yv)
            .filter(|(&s, &y)| (decide(s, 0.5) == AudioLabel::Foreground) == (y == 1))
            .count();
        assert_eq!(correct, 100);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Array2::zeros((5, 2));
        let e = train_classifier(&x, &[1; 5], ClassifierArch::Linear, &ClassifierTrainConfig::default());
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn threshold_tie_is_foreground() {
        assert_eq!(decide(0.5, 0.5), AudioLabel::Foreground);
        assert_eq!(decide(0.4999, 0.5), AudioLabel::Background);
    }

    #[test]
    fn bce_gradient_through_mlp() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let clf = LatentClassifier::new(ClassifierArch::Mlp, 64, 3);
        let x = Array2::from_shape_simple_fn((16, 64), || r.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..16).map(|i| (i % 2) as f64).collect();
        let (_, grads, _) = clf.loss_grad(&x, &y);
        let h = 1e-5;
        for (ti, g) in grads.iter().enumerate() {
            for j in (0..g.len()).step_by(37) {
                let mut p = clf.clone();
                p.net.tensors_mut()[ti][j] += h;
                let mut m = clf.clone();
                m.net.tensors_mut()[ti][j] -= h;
                let fd = (p.loss_grad(&x, &y).0 - m.loss_grad(&x, &y).0) / (2.0 * h);
                let rel = (fd - g[j]).abs() / fd.abs().max(g[j].abs()).max(1e-8);
                assert!(rel < 1e-4 || (fd - g[j]).abs() < 1e-9, "{rel}");
            }
        }
    }
}
