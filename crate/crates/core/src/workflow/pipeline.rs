//! In-memory building blocks shared by the command line and the benchmarks.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, WorldConfig};
use crate::audiosynth::{mix_scene_with, MultichannelAudio, NoiseSpec};
use crate::contrastive::{
    train_classifier, train_encoder, train_supervised, AudioModel, Encoder, EncoderConfig, LatentClassifier,
    TrainReport,
};
use crate::datastore::{balance_refs, build_audio_dataset, AudioSampleRef};
use crate::dsp::{extract_window_with, Stft, StftConfig, WindowAnchor};
use crate::error::{Error, Result};
use crate::evalkit::{evaluate, f_score, EvalConfig, EvalFrame, EvalReport, ScoredBox};
use crate::fusion::{replay, FramePrediction, MicPixelMap, ScenarioDetections, StreamSummary};
use crate::rng;
use crate::scenesim::{ground_truth_at, scripted_scenario, ScenarioSpec};

/// A scenario with its rendered microphone signals.
#[derive(Debug, Clone)]
pub struct RenderedScenario {
    pub name: String,
    pub spec: ScenarioSpec,
    pub noise: NoiseSpec,
    pub audio: MultichannelAudio,
}

/// Seed of the `index`-th scenario drawn from a master seed.
pub fn scenario_seed(master: u64, index: u64) -> u64 {
    rng::key(master, &[rng::tag("scenario"), index])
}

pub fn render_scenario(name: &str, seed: u64, world: &WorldConfig) -> Result<RenderedScenario> {
    let spec = scripted_scenario(seed, &world.script)?;
    let mic_ids: Vec<u32> = spec.mics.iter().map(|m| m.id).collect();
    let noise = if world.noise {
        NoiseSpec::random(rng::derive_seed(seed, "noise"), spec.duration, &mic_ids)
    } else {
        NoiseSpec::silent()
    };
    let audio = mix_scene_with(&spec, &noise, &world.cutout, rng::derive_seed(seed, "audio"), &world.mix)?;
    Ok(RenderedScenario {
        name: name.to_string(),
        spec,
        noise,
        audio,
    })
}

pub fn channel_files(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("audio/ch_{i}.wav")).collect()
}

/// Labelled windows of a rendered scenario.
pub fn scenario_refs(sc: &RenderedScenario, cfg: &ExperimentConfig) -> Result<Vec<AudioSampleRef>> {
    build_audio_dataset(&sc.spec, &sc.name, &channel_files(sc.spec.mics.len()), &cfg.dataset)
}

/// Pooled encoder inputs for windows `(channel, center time)` of `audio`, one row each.
pub fn window_features(
    audio: &MultichannelAudio,
    windows: &[(usize, f64)],
    stft: &StftConfig,
    encoder: &EncoderConfig,
    window_s: f64,
    anchor: WindowAnchor,
) -> Result<Array2<f64>> {
    let stft = Stft::new(*stft)?;
    let rows: Vec<Vec<f64>> = windows
        .par_iter()
        .map(|&(ch, t)| {
            let seg = extract_window_with(audio, ch, t, window_s, anchor)?;
            crate::contrastive::features_for(encoder, &stft.magnitude(&seg)?)
        })
        .collect::<Result<_>>()?;
    let d = encoder.pooled_len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((flat.len() / d, d), flat).map_err(|e| Error::data(e.to_string()))
}

/// Features of `refs` whose scenario is `sc`.
pub fn ref_features(sc: &RenderedScenario, refs: &[AudioSampleRef], cfg: &ExperimentConfig) -> Result<Array2<f64>> {
    let windows: Vec<(usize, f64)> = refs.iter().map(|r| (r.channel, r.center_time)).collect();
    window_features(&sc.audio, &windows, &cfg.stft, &cfg.encoder, cfg.tick.window_s, cfg.tick.anchor)
}

/// Features and 0/1 labels over several scenarios; `balanced` applies the
/// dataset's background cap per scenario.
pub fn labelled_features(
    scenarios: &[RenderedScenario],
    cfg: &ExperimentConfig,
    balanced: bool,
) -> Result<(Array2<f64>, Vec<usize>)> {
    let mut blocks = Vec::new();
    let mut labels = Vec::new();
    for sc in scenarios {
        let mut refs = scenario_refs(sc, cfg)?;
        if balanced {
            refs = balance_refs(&refs, cfg.dataset.background_ratio, rng::key(sc.spec.seed, &[rng::tag(&sc.name)]));
        }
        labels.extend(refs.iter().map(|r| r.label.class_id() as usize));
        blocks.push(ref_features(sc, &refs, cfg)?);
    }
    stack(&blocks, cfg.encoder.pooled_len()).map(|x| (x, labels))
}

pub fn stack(blocks: &[Array2<f64>], d: usize) -> Result<Array2<f64>> {
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    if views.is_empty() {
        return Ok(Array2::zeros((0, d)));
    }
    ndarray::concatenate(ndarray::Axis(0), &views).map_err(|e| Error::data(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Contrastive pretraining, then a classifier on the frozen latents.
    Scl,
    /// Encoder and classifier trained jointly on cross-entropy.
    Supervised,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::Scl => "scl",
            Objective::Supervised => "supervised",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub objective: Objective,
    pub encoder: Encoder,
    pub classifier: LatentClassifier,
    pub encoder_report: TrainReport,
    pub classifier_trace: Vec<f64>,
    pub seed: u64,
}

impl TrainedModel {
    pub fn audio_model(&self, cfg: &ExperimentConfig) -> Result<AudioModel> {
        AudioModel::new(self.encoder.clone(), self.classifier.clone(), cfg.threshold, cfg.stft)
    }
}

/// Trains one audio model. `seed` feeds both the encoder and classifier streams.
pub fn train_model(
    x: &Array2<f64>,
    y: &[usize],
    cfg: &ExperimentConfig,
    objective: Objective,
    seed: u64,
) -> Result<TrainedModel> {
    let mut tcfg = cfg.train.clone();
    tcfg.seed = rng::key(seed, &[rng::tag("encoder"), cfg.train.seed]);
    match objective {
        Objective::Scl => {
            let (encoder, encoder_report) = train_encoder(x, y, &cfg.encoder, &tcfg)?;
            let mut ccfg = cfg.classifier.clone();
            ccfg.seed = rng::key(seed, &[rng::tag("classifier"), cfg.classifier.seed]);
            let z = encoder.latents(x);
            let (classifier, classifier_trace) = train_classifier(&z, y, cfg.classifier_arch, &ccfg)?;
            Ok(TrainedModel {
                objective,
                encoder,
                classifier,
                encoder_report,
                classifier_trace,
                seed,
            })
        }
        Objective::Supervised => {
            let (encoder, classifier, encoder_report) =
                train_supervised(x, y, &cfg.encoder, cfg.classifier_arch, &tcfg)?;
            Ok(TrainedModel {
                objective,
                encoder,
                classifier,
                encoder_report,
                classifier_trace: Vec::new(),
                seed,
            })
        }
    }
}

/// Precision, recall and F-score of thresholded scores against 0/1 labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub accuracy: f64,
}

pub fn binary_metrics(scores: &[f64], labels: &[usize], threshold: f64) -> BinaryMetrics {
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l == 1) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let div = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = div(tp, tp + fp);
    let recall = div(tp, tp + fn_);
    BinaryMetrics {
        precision,
        recall,
        f_score: f_score(precision, recall),
        accuracy: div(tp + tn, scores.len()),
    }
}

pub fn model_metrics(model: &TrainedModel, x: &Array2<f64>, y: &[usize], threshold: f64) -> BinaryMetrics {
    let scores = model.classifier.scores(&model.encoder.latents(x));
    binary_metrics(&scores, y, threshold)
}

/// Offline replay of a scenario through the fusion pipeline.
pub fn run_scenario(
    sc: &RenderedScenario,
    model: &AudioModel,
    cfg: &ExperimentConfig,
    oracle: bool,
) -> Result<(Vec<FramePrediction>, StreamSummary)> {
    let map = MicPixelMap::from_scenario(&sc.spec)?;
    let mut src = if oracle {
        ScenarioDetections::oracle(&sc.spec)
    } else {
        ScenarioDetections::noisy(&sc.spec, cfg.detector.clone())?
    };
    replay(&sc.spec, &mut src, &sc.audio, &map, model, &cfg.tick)
}

pub fn gt_eval_frames(spec: &ScenarioSpec, frames: &[usize]) -> Result<Vec<EvalFrame>> {
    frames
        .iter()
        .map(|&f| {
            let gt = ground_truth_at(spec, f)?;
            Ok(EvalFrame {
                frame: f,
                boxes: gt
                    .boxes
                    .iter()
                    .map(|g| ScoredBox {
                        bbox: g.bbox,
                        class: g.status,
                        conf: 1.0,
                    })
                    .collect(),
                latency_ms: None,
            })
        })
        .collect()
}

pub fn pred_eval_frames(preds: &[FramePrediction]) -> Vec<EvalFrame> {
    preds
        .iter()
        .map(|p| EvalFrame {
            frame: p.frame,
            boxes: p
                .boxes
                .iter()
                .map(|b| ScoredBox {
                    bbox: b.bbox(),
                    class: b.status,
                    conf: b.conf,
                })
                .collect(),
            latency_ms: p.latency_ms,
        })
        .collect()
}

/// Evaluates predictions of one or more scenarios together. Frame indices of
/// later scenarios are offset so that all frames stay distinct.
pub fn evaluate_runs(runs: &[(&ScenarioSpec, &[FramePrediction])], cfg: &EvalConfig) -> Result<EvalReport> {
    let mut gt = Vec::new();
    let mut pr = Vec::new();
    let mut offset = 0usize;
    for (spec, preds) in runs {
        let frames: Vec<usize> = preds.iter().map(|p| p.frame).collect();
        for mut f in gt_eval_frames(spec, &frames)? {
            f.frame += offset;
            gt.push(f);
        }
        for mut f in pred_eval_frames(preds) {
            f.frame += offset;
            pr.push(f);
        }
        offset += spec.n_frames();
    }
    evaluate(&gt, &pr, cfg)
}
