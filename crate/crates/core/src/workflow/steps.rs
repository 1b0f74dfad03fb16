//! Experiment-directory steps behind the command line. Each step reads what
//! earlier steps registered in the manifest, writes its own artifacts and
//! records them (with the config it ran under) before saving the manifest.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::pipeline::{
    model_metrics, pred_eval_frames, render_scenario, scenario_refs, scenario_seed, train_model, window_features,
    BinaryMetrics, Objective, TrainedModel,
};
use crate::audiosynth::{read_multichannel, write_multichannel, MultichannelAudio, NoiseSpec};
use crate::contrastive::checkpoint::{
    load_classifier, load_encoder, save_classifier, save_encoder, sidecar_path, ClassifierMeta, EncoderMeta,
    CHECKPOINT_VERSION,
};
use crate::contrastive::AudioModel;
use crate::datastore::{
    balance_refs, build_audio_dataset, encode_features, read_features, split_refs, AudioSampleRef, DatasetSplits, Experiment,
};
use crate::error::{Error, Result};
use crate::evalkit::export::{pr_curve_csv, pr_curves_svg, report_table, trajectories_csv, trajectories_svg};
use crate::evalkit::{evaluate, reconstruct_trajectories, EvalFrame, EvalReport, TimedBoxes, TrackerConfig};
use crate::fusion::{
    run_stream, switch_delays, DetectionSource, FramePrediction, MicPixel, MicPixelMap, RecordedDetections, RunMode,
    ScenarioDetections, SwitchDelay,
};
use crate::rng;
use crate::scenesim::io::{read_jsonl, write_jsonl, FrameRecord};
use crate::scenesim::{ground_truth_at, ScenarioSpec};

pub const SCENARIO_FILE: &str = "scenario.json";
pub const MIC_MAP_FILE: &str = "mic_map.json";
pub const GT_FILE: &str = "gt.jsonl";
pub const DATASET_FILE: &str = "dataset.json";
pub const FEATURES_FILE: &str = "features.bin";
pub const PREDS_FILE: &str = "preds.jsonl";
pub const LATENCY_LOG: &str = "logs/latency.jsonl";
pub const ENCODER_CKPT: &str = "checkpoints/encoder.bin";
pub const CLASSIFIER_CKPT: &str = "checkpoints/classifier.bin";
pub const SL_ENCODER_CKPT: &str = "checkpoints/sl_encoder.bin";
pub const SL_CLASSIFIER_CKPT: &str = "checkpoints/sl_classifier.bin";

fn record_config(exp: &mut Experiment, stage: &str, cfg: &ExperimentConfig) -> Result<()> {
    let r = exp.write_json(&format!("configs/{stage}.json"), cfg)?;
    exp.manifest.configs.insert(stage.to_string(), r);
    Ok(())
}

fn load_scenario(exp: &Experiment) -> Result<ScenarioSpec> {
    let spec: ScenarioSpec = exp.read_json(SCENARIO_FILE)?;
    spec.validate()?;
    Ok(spec)
}

fn load_audio(exp: &Experiment) -> Result<MultichannelAudio> {
    read_multichannel(&exp.path("audio"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSummary {
    pub seed: u64,
    pub duration: f64,
    pub n_vehicles: usize,
    pub n_channels: usize,
    pub samples_per_channel: usize,
    pub n_frames: usize,
    pub n_gt_boxes: usize,
}

/// Renders one scenario into `root`: scenario, noise script, WAVs, mic map and ground truth.
pub fn simulate(root: &Path, cfg: &ExperimentConfig, seed: u64) -> Result<SimulateSummary> {
    cfg.validate()?;
    let sc = render_scenario("scenario", scenario_seed(seed, 0), &cfg.world)?;
    let mut exp = Experiment::create(root, seed)?;
    record_config(&mut exp, "simulate", cfg)?;
    exp.manifest.scenario = Some(exp.write_json(SCENARIO_FILE, &sc.spec)?);
    let noise = exp.write_json("noise.json", &sc.noise)?;
    exp.manifest.configs.insert("noise".into(), noise);

    let audio_manifest = write_multichannel(&exp.path("audio"), &sc.audio)?;
    exp.manifest.audio_manifest = Some(exp.file_ref("audio/manifest.json")?);
    exp.manifest.audio_channels = audio_manifest
        .channels
        .iter()
        .map(|c| exp.file_ref(&format!("audio/{}", c.path)))
        .collect::<Result<_>>()?;

    let map = MicPixelMap::from_scenario(&sc.spec)?;
    exp.manifest.mic_map = Some(exp.write_json(MIC_MAP_FILE, &map)?);

    let mut gt_bytes = Vec::new();
    let mut n_gt_boxes = 0;
    let n_frames = sc.spec.n_frames();
    let records = (0..n_frames)
        .map(|f| {
            let gt = ground_truth_at(&sc.spec, f)?;
            n_gt_boxes += gt.boxes.len();
            Ok(FrameRecord::from(&gt))
        })
        .collect::<Result<Vec<_>>>()?;
    write_jsonl(&mut gt_bytes, &records)?;
    exp.manifest.ground_truth = Some(exp.write_bytes(GT_FILE, &gt_bytes)?);
    exp.save()?;
    Ok(SimulateSummary {
        seed,
        duration: sc.spec.duration,
        n_vehicles: sc.spec.vehicles.len(),
        n_channels: sc.audio.n_channels(),
        samples_per_channel: sc.audio.len(),
        n_frames,
        n_gt_boxes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    /// Labelled windows before background subsampling.
    pub n_labelled: usize,
    pub n_windows: usize,
    pub foreground: usize,
    pub background: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// Script of one training scene; rendering it again reproduces its audio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingScene {
    pub name: String,
    pub seed: u64,
    pub spec: ScenarioSpec,
    pub noise: NoiseSpec,
}

/// Renders the training scenes (or falls back to the experiment's own
/// scenario), labels and balances windows per scene, splits them, and stores
/// the window features.
pub fn build_dataset(root: &Path, cfg: &ExperimentConfig) -> Result<DatasetSummary> {
    cfg.validate()?;
    let mut exp = Experiment::open(root)?;
    let seed = exp.manifest.seed;
    let balance_seed = |name: &str| rng::key(seed, &[rng::tag("balance"), rng::tag(name)]);

    let mut all_count = 0;
    let mut refs = Vec::new();
    let mut feats: BTreeMap<String, Array2<f64>> = BTreeMap::new();
    let mut scene_refs = Vec::new();
    if cfg.training.scenes == 0 {
        let spec = load_scenario(&exp)?;
        let files: Vec<String> = exp.manifest.audio_channels.iter().map(|f| f.path.clone()).collect();
        let all = build_audio_dataset(&spec, "scenario", &files, &cfg.dataset)?;
        all_count += all.len();
        let kept = balance_refs(&all, cfg.dataset.background_ratio, balance_seed("scenario"));
        feats.insert("scenario".into(), features_of(&load_audio(&exp)?, &kept, cfg)?);
        refs.extend(kept);
    } else {
        let world = cfg.training_world();
        for i in 1..=cfg.training.scenes {
            let name = format!("train_{i:02}");
            let sc = render_scenario(&name, scenario_seed(seed, i as u64), &world)?;
            let all = scenario_refs(&sc, cfg)?;
            all_count += all.len();
            let kept = balance_refs(&all, cfg.dataset.background_ratio, balance_seed(&name));
            feats.insert(name.clone(), features_of(&sc.audio, &kept, cfg)?);
            refs.extend(kept);
            let script = TrainingScene {
                name: name.clone(),
                seed: sc.spec.seed,
                spec: sc.spec,
                noise: sc.noise,
            };
            scene_refs.push(exp.write_json(&format!("training_scenes/{name}.json"), &script)?);
        }
    }
    let splits = split_refs(&refs, &cfg.split, rng::derive_seed(seed, "split"))?;

    // features follow the split order; rows are found by (scene, position in scene)
    let mut row_of: BTreeMap<(&str, usize, u64), usize> = BTreeMap::new();
    let mut offset: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &refs {
        let n = offset.entry(r.scenario.as_str()).or_insert(0);
        row_of.insert((r.scenario.as_str(), r.channel, r.center_time.to_bits()), *n);
        *n += 1;
    }
    let d = cfg.encoder.pooled_len();
    let ordered: Vec<&AudioSampleRef> = splits.train.iter().chain(&splits.validation).chain(&splits.test).collect();
    let mut x = Array2::zeros((ordered.len(), d));
    for (i, r) in ordered.iter().enumerate() {
        let row = row_of[&(r.scenario.as_str(), r.channel, r.center_time.to_bits())];
        x.row_mut(i).assign(&feats[&r.scenario].row(row));
    }

    record_config(&mut exp, "dataset", cfg)?;
    exp.manifest.training_scenes = scene_refs;
    exp.manifest.dataset = Some(exp.write_json(DATASET_FILE, &splits)?);
    exp.manifest.features = Some(exp.write_bytes(FEATURES_FILE, &encode_features(&x))?);
    exp.manifest.splits = [
        ("train".to_string(), splits.train.len()),
        ("validation".to_string(), splits.validation.len()),
        ("test".to_string(), splits.test.len()),
    ]
    .into_iter()
    .collect();
    exp.save()?;
    let fg = refs.iter().filter(|r| r.label.is_foreground()).count();
    Ok(DatasetSummary {
        n_labelled: all_count,
        n_windows: refs.len(),
        foreground: fg,
        background: refs.len() - fg,
        train: splits.train.len(),
        validation: splits.validation.len(),
        test: splits.test.len(),
    })
}

fn features_of(audio: &MultichannelAudio, refs: &[AudioSampleRef], cfg: &ExperimentConfig) -> Result<Array2<f64>> {
    let windows: Vec<(usize, f64)> = refs.iter().map(|r| (r.channel, r.center_time)).collect();
    window_features(audio, &windows, &cfg.stft, &cfg.encoder, cfg.tick.window_s, cfg.tick.anchor)
}

fn labels(refs: &[AudioSampleRef]) -> Vec<usize> {
    refs.iter().map(|r| r.label.class_id() as usize).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub objective: Objective,
    pub final_loss: Option<f64>,
    pub train: BinaryMetrics,
    pub validation: Option<BinaryMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub n_train: usize,
    pub n_validation: usize,
    pub models: Vec<ModelSummary>,
}

fn save_model(exp: &mut Experiment, m: &TrainedModel, cfg: &ExperimentConfig, enc_path: &str, clf_path: &str) -> Result<()> {
    let emeta = EncoderMeta {
        format_version: CHECKPOINT_VERSION,
        encoder: m.encoder.config.clone(),
        objective: m.objective.as_str().to_string(),
        seed: m.seed,
        train: serde_json::to_value(&cfg.train)?,
        loss_trace: m.encoder_report.loss_trace.clone(),
    };
    save_encoder(&exp.path(enc_path), &m.encoder, &emeta)?;
    let cmeta = ClassifierMeta {
        format_version: CHECKPOINT_VERSION,
        arch: m.classifier.arch,
        n_in: m.classifier.net.n_in(),
        threshold: cfg.threshold,
        seed: m.seed,
        loss_trace: m.classifier_trace.clone(),
    };
    save_classifier(&exp.path(clf_path), &m.classifier, &cmeta)?;
    for p in [enc_path, clf_path] {
        let stem = p.trim_start_matches("checkpoints/").trim_end_matches(".bin").to_string();
        let side = sidecar_path(Path::new(p)).to_string_lossy().into_owned();
        let bin = exp.file_ref(p)?;
        let meta = exp.file_ref(&side)?;
        exp.manifest.checkpoints.insert(stem.clone(), bin);
        exp.manifest.checkpoints.insert(format!("{stem}_meta"), meta);
    }
    Ok(())
}

/// Trains the contrastive model (and optionally the supervised baseline) on the train split.
pub fn train(root: &Path, cfg: &ExperimentConfig, baseline: bool) -> Result<TrainSummary> {
    cfg.validate()?;
    let mut exp = Experiment::open(root)?;
    if exp.manifest.dataset.is_none() {
        return Err(Error::data(format!("{}: no dataset yet, run build-dataset first", root.display())));
    }
    let splits: DatasetSplits = exp.read_json(DATASET_FILE)?;
    let all = read_features(&exp.path(FEATURES_FILE))?;
    let (n_tr, n_va) = (splits.train.len(), splits.validation.len());
    if all.nrows() != n_tr + n_va + splits.test.len() || all.ncols() != cfg.encoder.pooled_len() {
        return Err(Error::data(format!(
            "{FEATURES_FILE}: {}x{} does not match the dataset and encoder config",
            all.nrows(),
            all.ncols()
        )));
    }
    let x = all.slice(ndarray::s![..n_tr, ..]).to_owned();
    let y = labels(&splits.train);
    let val = (n_va > 0).then(|| (all.slice(ndarray::s![n_tr..n_tr + n_va, ..]).to_owned(), labels(&splits.validation)));
    let seed = rng::derive_seed(exp.manifest.seed, "train");
    let mut objectives = vec![(Objective::Scl, ENCODER_CKPT, CLASSIFIER_CKPT)];
    if baseline {
        objectives.push((Objective::Supervised, SL_ENCODER_CKPT, SL_CLASSIFIER_CKPT));
    }
    let mut models = Vec::new();
    for (objective, enc_path, clf_path) in objectives {
        let m = train_model(&x, &y, cfg, objective, seed)?;
        save_model(&mut exp, &m, cfg, enc_path, clf_path)?;
        models.push(ModelSummary {
            objective,
            final_loss: m.encoder_report.loss_trace.last().copied(),
            train: model_metrics(&m, &x, &y, cfg.threshold),
            validation: val.as_ref().map(|(xv, yv)| model_metrics(&m, xv, yv, cfg.threshold)),
        });
    }
    let summary = TrainSummary {
        n_train: y.len(),
        n_validation: val.as_ref().map_or(0, |v| v.1.len()),
        models,
    };
    record_config(&mut exp, "train", cfg)?;
    let r = exp.write_json("reports/train.json", &summary)?;
    exp.manifest.reports.insert("train".into(), r);
    exp.save()?;
    Ok(summary)
}

/// Loads the contrastive checkpoints of the experiment in `models_root`.
pub fn load_model(models_root: &Path, cfg: &ExperimentConfig) -> Result<AudioModel> {
    let (encoder, _) = load_encoder(&models_root.join(ENCODER_CKPT))?;
    let (classifier, meta) = load_classifier(&models_root.join(CLASSIFIER_CKPT))?;
    AudioModel::new(encoder, classifier, meta.threshold, cfg.stft)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorChoice {
    Noisy,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mode: RunMode,
    pub n_ticks: usize,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub over_budget: usize,
    pub wall_s: f64,
}

#[derive(Serialize)]
struct LatencyRecord {
    tick: usize,
    t: f64,
    latency_ms: f64,
    over_budget: bool,
}

/// Streams the scenario through the pipeline and writes `preds.jsonl`.
/// Models come from `models_root` (defaults to the experiment itself);
/// `detections` replaces the simulated detector with a recorded JSONL stream.
pub fn run(
    root: &Path,
    cfg: &ExperimentConfig,
    mode: RunMode,
    detector: DetectorChoice,
    models_root: Option<&Path>,
    detections: Option<&Path>,
) -> Result<RunSummary> {
    cfg.validate()?;
    let mut exp = Experiment::open(root)?;
    let model = load_model(models_root.unwrap_or(root), cfg)?;
    let spec = load_scenario(&exp)?;
    let audio = load_audio(&exp)?;
    let map = MicPixelMap::load(&exp.path(MIC_MAP_FILE))?;
    map.validate(spec.camera.width as f64, spec.camera.height as f64)?;

    let mut source: Box<dyn DetectionSource + '_> = match detections {
        Some(p) => {
            if !p.exists() {
                return Err(Error::MissingFile(p.to_path_buf()));
            }
            let file = fs::File::open(p).map_err(|e| Error::io(p, e))?;
            let records: Vec<FrameRecord> = read_jsonl(std::io::BufReader::new(file))?;
            let frames = records
                .iter()
                .map(|r| Ok((r.frame, r.to_detections()?)))
                .collect::<Result<Vec<_>>>()?;
            Box::new(RecordedDetections::new(frames)?)
        }
        None => match detector {
            DetectorChoice::Oracle => Box::new(ScenarioDetections::oracle(&spec)),
            DetectorChoice::Noisy => Box::new(ScenarioDetections::noisy(&spec, cfg.detector.clone())?),
        },
    };

    let preds_path = exp.path(PREDS_FILE);
    let file = fs::File::create(&preds_path).map_err(|e| Error::io(&preds_path, e))?;
    let mut out = BufWriter::new(file);
    let start = Instant::now();
    let summary = run_stream(&spec, source.as_mut(), &audio, &map, &model, &cfg.tick, mode, |p| {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n").map_err(|e| Error::io(&preds_path, e))?;
        if mode == RunMode::Realtime {
            out.flush().map_err(|e| Error::io(&preds_path, e))?;
        }
        Ok(())
    })?;
    out.flush().map_err(|e| Error::io(&preds_path, e))?;
    drop(out);
    let wall_s = start.elapsed().as_secs_f64();

    // wall-clock figures stay out of the manifest so replays remain byte-identical
    let ticks = crate::fusion::tick_schedule(spec.duration, spec.fps, cfg.tick.cadence)?;
    let mut log = Vec::new();
    let records: Vec<LatencyRecord> = ticks
        .iter()
        .zip(&summary.latencies_ms)
        .map(|(t, &l)| LatencyRecord {
            tick: t.index,
            t: t.t,
            latency_ms: l,
            over_budget: l > cfg.tick.latency_budget_ms,
        })
        .collect();
    write_jsonl(&mut log, &records)?;
    let log_path = exp.path(LATENCY_LOG);
    fs::create_dir_all(log_path.parent().unwrap()).map_err(|e| Error::io(&log_path, e))?;
    fs::write(&log_path, log).map_err(|e| Error::io(&log_path, e))?;

    record_config(&mut exp, "run", cfg)?;
    exp.manifest.predictions = Some(exp.file_ref(PREDS_FILE)?);
    exp.save()?;
    let lat = crate::evalkit::summarize_latency(&summary.latencies_ms, cfg.tick.latency_budget_ms);
    Ok(RunSummary {
        mode,
        n_ticks: summary.n_ticks,
        median_ms: lat.as_ref().map_or(0.0, |l| l.median_ms),
        p99_ms: lat.as_ref().map_or(0.0, |l| l.p99_ms),
        over_budget: summary.over_budget.len(),
        wall_s,
    })
}

pub fn read_predictions(path: &Path) -> Result<Vec<FramePrediction>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(std::io::BufReader::new(file))
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<FrameRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(std::io::BufReader::new(file))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub n_frames: usize,
    pub map_50: Option<f64>,
    pub ap_idling_50: Option<f64>,
    pub audio_f_score: f64,
    pub n_switches: usize,
    pub max_switch_delay: Option<usize>,
    pub missed_switches: usize,
}

/// Scores `preds.jsonl` (or `predictions`, a stream from elsewhere) against
/// `gt.jsonl` and writes the report artifacts.
pub fn eval(root: &Path, cfg: &ExperimentConfig, predictions: Option<&Path>) -> Result<(EvalReport, EvalSummary)> {
    let mut exp = Experiment::open(root)?;
    let spec = load_scenario(&exp)?;
    let gt_records = read_ground_truth(&exp.path(GT_FILE))?;
    let gt: Vec<EvalFrame> = gt_records
        .iter()
        .map(|r| {
            let g = r.to_ground_truth(spec.fps)?;
            Ok(gt_eval_frames_from(&g))
        })
        .collect::<Result<_>>()?;
    let preds = read_predictions(&predictions.map_or_else(|| exp.path(PREDS_FILE), Path::to_path_buf))?;
    let report = evaluate(&gt, &pred_eval_frames(&preds), &cfg.eval)?;
    let delays = switch_delays(&spec, &preds)?;

    let stream: Vec<TimedBoxes> = pred_eval_frames(&preds)
        .into_iter()
        .zip(&preds)
        .map(|(f, p)| TimedBoxes { t: p.t, boxes: f.boxes })
        .collect();
    let tracks = reconstruct_trajectories(&stream, &TrackerConfig::default());

    record_config(&mut exp, "eval", cfg)?;
    let put = |exp: &mut Experiment, key: &str, rel: &str, bytes: Vec<u8>| -> Result<()> {
        let r = exp.write_bytes(rel, &bytes)?;
        exp.manifest.reports.insert(key.to_string(), r);
        Ok(())
    };
    put(&mut exp, "eval", "reports/eval.json", (serde_json::to_string_pretty(&report)? + "\n").into_bytes())?;
    put(&mut exp, "table", "reports/table.txt", report_table(&report).into_bytes())?;
    if let Some(t) = report.at(0.5) {
        put(&mut exp, "pr_csv", "reports/pr_curves.csv", pr_curve_csv(&t.curves).into_bytes())?;
        put(&mut exp, "pr_svg", "reports/pr_curves.svg", pr_curves_svg(&t.curves).into_bytes())?;
    }
    put(&mut exp, "trajectories_csv", "reports/trajectories.csv", trajectories_csv(&tracks).into_bytes())?;
    put(&mut exp, "trajectories_svg", "reports/trajectories.svg", trajectories_svg(&tracks).into_bytes())?;
    put(&mut exp, "switch_delays", "reports/switch_delays.json", (serde_json::to_string_pretty(&delays)? + "\n").into_bytes())?;
    exp.save()?;

    let summary = EvalSummary {
        n_frames: report.n_frames,
        map_50: report.map_at(0.5),
        ap_idling_50: report.ap(0.5, crate::types::Status::Idling),
        audio_f_score: report.audio.f_score,
        n_switches: delays.len(),
        max_switch_delay: delays.iter().filter_map(|d| d.delay_ticks).max(),
        missed_switches: delays.iter().filter(|d| d.delay_ticks.is_none()).count(),
    };
    Ok((report, summary))
}

fn gt_eval_frames_from(g: &crate::scenesim::GroundTruthFrame) -> EvalFrame {
    EvalFrame {
        frame: g.frame_index,
        boxes: g
            .boxes
            .iter()
            .map(|b| crate::evalkit::ScoredBox {
                bbox: b.bbox,
                class: b.status,
                conf: 1.0,
            })
            .collect(),
        latency_ms: None,
    }
}

/// The rendered table of a previous `eval`.
pub fn report(root: &Path) -> Result<String> {
    let exp = Experiment::open(root)?;
    if !exp.manifest.reports.contains_key("eval") {
        return Err(Error::data(format!("{}: no evaluation yet, run eval first", root.display())));
    }
    let r: EvalReport = exp.read_json("reports/eval.json")?;
    Ok(report_table(&r))
}

/// Switch delays recorded by the last `eval`.
pub fn read_switch_delays(root: &Path) -> Result<Vec<SwitchDelay>> {
    Experiment::open(root)?.read_json("reports/switch_delays.json")
}

/// Writes the scenario's microphone pixel map (or `map` when given) into the experiment.
/// Pairs pixel coordinates with the scenario's microphones in array order.
pub fn mic_map_from_pixels(root: &Path, pixels: &[(f64, f64)]) -> Result<MicPixelMap> {
    let exp = Experiment::open(root)?;
    let spec = load_scenario(&exp)?;
    if pixels.len() != spec.mics.len() {
        return Err(Error::config(format!(
            "expected {} pixel coordinates, got {}",
            spec.mics.len(),
            pixels.len()
        )));
    }
    let mics = spec
        .mics
        .iter()
        .zip(pixels)
        .map(|(m, &(u, v))| MicPixel { mic_id: m.id, u, v })
        .collect();
    Ok(MicPixelMap { mics })
}

pub fn setup_mics(root: &Path, map: Option<MicPixelMap>) -> Result<MicPixelMap> {
    let mut exp = Experiment::open(root)?;
    let spec = load_scenario(&exp)?;
    let map = match map {
        Some(m) => m,
        None => MicPixelMap::from_scenario(&spec)?,
    };
    map.validate(spec.camera.width as f64, spec.camera.height as f64)?;
    exp.manifest.mic_map = Some(exp.write_json(MIC_MAP_FILE, &map)?);
    exp.save()?;
    Ok(map)
}
