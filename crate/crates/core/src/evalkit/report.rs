use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ap::{average_precision, f_score, pr_points, Interpolation, PrCurve};
use super::matching::{match_detections, MatchConfig, ScoredBox};
use crate::error::{Error, Result};
use crate::types::Status;

/// Boxes of one evaluated frame (ground truth uses confidence 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFrame {
    pub frame: usize,
    pub boxes: Vec<ScoredBox>,
    #[serde(default)]
    pub latency_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub iou_thresholds: Vec<f64>,
    pub class_aware: bool,
    pub interpolation: Interpolation,
    pub latency_budget_ms: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_thresholds: vec![0.5, 0.75],
            class_aware: true,
            interpolation: Interpolation::AllPoint,
            latency_budget_ms: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub n_gt: usize,
    pub n_pred: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    /// `None` when the class has no ground truth.
    pub ap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub iou_threshold: f64,
    pub per_class: BTreeMap<String, ClassStats>,
    /// Mean AP over classes with ground truth.
    pub map: Option<f64>,
    #[serde(skip)]
    pub curves: Vec<PrCurve>,
}

/// Idling-vs-off decisions on stationary vehicles, scored against the
/// ground-truth engine state (foreground = idling).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AudioStageReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub n_ticks: usize,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub max_ms: f64,
    pub over_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_frames: usize,
    pub class_aware: bool,
    pub interpolation: Interpolation,
    pub thresholds: Vec<ThresholdReport>,
    pub audio: AudioStageReport,
    pub latency: Option<LatencySummary>,
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn at(&self, iou_threshold: f64) -> Option<&ThresholdReport> {
        self.thresholds.iter().find(|t| (t.iou_threshold - iou_threshold).abs() < 1e-12)
    }

    pub fn map_at(&self, iou_threshold: f64) -> Option<f64> {
        self.at(iou_threshold).and_then(|t| t.map)
    }

    pub fn ap(&self, iou_threshold: f64, class: Status) -> Option<f64> {
        self.at(iou_threshold)
            .and_then(|t| t.per_class.get(class.as_str()))
            .and_then(|c| c.ap)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Nearest-rank percentile of sorted values.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn summarize_latency(values: &[f64], budget_ms: f64) -> Option<LatencySummary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(LatencySummary {
        n_ticks: v.len(),
        median_ms: percentile(&v, 0.5),
        p99_ms: percentile(&v, 0.99),
        max_ms: *v.last().unwrap(),
        over_budget: v.iter().filter(|&&x| x > budget_ms).count(),
    })
}

/// Pairs every prediction frame with its ground-truth frame.
fn align<'a>(gt: &'a [EvalFrame], preds: &'a [EvalFrame]) -> Result<Vec<(&'a EvalFrame, &'a EvalFrame)>> {
    let by_frame: BTreeMap<usize, &EvalFrame> = gt.iter().map(|f| (f.frame, f)).collect();
    if preds.windows(2).any(|w| w[1].frame <= w[0].frame) {
        return Err(Error::data("prediction frames must be strictly increasing"));
    }
    let missing: Vec<usize> = preds.iter().map(|p| p.frame).filter(|f| !by_frame.contains_key(f)).collect();
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(10).map(|f| f.to_string()).collect();
        return Err(Error::data(format!(
            "{} prediction frame(s) have no ground truth: {}{}",
            missing.len(),
            shown.join(", "),
            if missing.len() > 10 { ", ..." } else { "" }
        )));
    }
    Ok(preds.iter().map(|p| (by_frame[&p.frame], p)).collect())
}

fn class_keys(class_aware: bool) -> Vec<(String, Option<Status>)> {
    if class_aware {
        Status::ALL.iter().map(|&s| (s.as_str().to_string(), Some(s))).collect()
    } else {
        vec![("vehicle".to_string(), None)]
    }
}

/// Scores predictions against ground truth on every predicted frame.
pub fn evaluate(gt: &[EvalFrame], preds: &[EvalFrame], cfg: &EvalConfig) -> Result<EvalReport> {
    let pairs = align(gt, preds)?;
    let mut notes = Vec::new();
    let mut thresholds = Vec::new();
    for &thr in &cfg.iou_thresholds {
        let mcfg = MatchConfig {
            iou_threshold: thr,
            class_aware: cfg.class_aware,
        };
        mcfg.validate()?;
        let keys = class_keys(cfg.class_aware);
        let mut ranked: Vec<Vec<(f64, bool)>> = vec![Vec::new(); keys.len()];
        let mut counts = vec![(0usize, 0usize, 0usize, 0usize); keys.len()]; // n_gt, tp, fp, fn
        let slot = |c: Status| keys.iter().position(|k| k.1.is_none_or(|s| s == c)).unwrap();
        for (g, p) in &pairs {
            let m = match_detections(&p.boxes, &g.boxes, &mcfg);
            for b in &g.boxes {
                counts[slot(b.class)].0 += 1;
            }
            for &(pi, _) in &m.tp {
                let k = slot(p.boxes[pi].class);
                ranked[k].push((p.boxes[pi].conf, true));
                counts[k].1 += 1;
            }
            for &pi in &m.fp {
                let k = slot(p.boxes[pi].class);
                ranked[k].push((p.boxes[pi].conf, false));
                counts[k].2 += 1;
            }
            for &gi in &m.fn_ {
                counts[slot(g.boxes[gi].class)].3 += 1;
            }
        }
        let mut per_class = BTreeMap::new();
        let mut curves = Vec::new();
        let mut aps = Vec::new();
        for (k, (name, _)) in keys.iter().enumerate() {
            let (n_gt, tp, fp, fn_) = counts[k];
            let ap = average_precision(&ranked[k], n_gt, cfg.interpolation);
            match ap {
                Some(v) => aps.push(v),
                None => notes.push(format!("class {name} has no ground truth at IOU {thr}; excluded from mAP")),
            }
            curves.push(PrCurve {
                class: name.clone(),
                points: pr_points(&ranked[k], n_gt),
            });
            per_class.insert(
                name.clone(),
                ClassStats {
                    n_gt,
                    n_pred: ranked[k].len(),
                    tp,
                    fp,
                    fn_,
                    precision: ratio(tp, tp + fp),
                    recall: ratio(tp, tp + fn_),
                    ap,
                },
            );
        }
        let map = (!aps.is_empty()).then(|| aps.iter().sum::<f64>() / aps.len() as f64);
        thresholds.push(ThresholdReport {
            iou_threshold: thr,
            per_class,
            map,
            curves,
        });
    }
    let audio = audio_stage(&pairs);
    let latencies: Vec<f64> = preds.iter().filter_map(|p| p.latency_ms).collect();
    Ok(EvalReport {
        n_frames: pairs.len(),
        class_aware: cfg.class_aware,
        interpolation: cfg.interpolation,
        thresholds,
        audio,
        latency: summarize_latency(&latencies, cfg.latency_budget_ms),
        notes,
    })
}

fn audio_stage(pairs: &[(&EvalFrame, &EvalFrame)]) -> AudioStageReport {
    let mut r = AudioStageReport::default();
    let agnostic = MatchConfig {
        iou_threshold: 0.5,
        class_aware: false,
    };
    for (g, p) in pairs {
        let stationary = |b: &&ScoredBox| b.class != Status::Moving;
        let gs: Vec<ScoredBox> = g.boxes.iter().filter(stationary).copied().collect();
        let ps: Vec<ScoredBox> = p.boxes.iter().filter(stationary).copied().collect();
        for (pi, gi) in match_detections(&ps, &gs, &agnostic).tp {
            match (ps[pi].class == Status::Idling, gs[gi].class == Status::Idling) {
                (true, true) => r.tp += 1,
                (true, false) => r.fp += 1,
                (false, true) => r.fn_ += 1,
                (false, false) => r.tn += 1,
            }
        }
    }
    r.precision = ratio(r.tp, r.tp + r.fp);
    r.recall = ratio(r.tp, r.tp + r.fn_);
    r.f_score = f_score(r.precision, r.recall);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::PixelBox;

    fn frame(frame: usize, boxes: &[(f64, Status, f64)]) -> EvalFrame {
        EvalFrame {
            frame,
            boxes: boxes
                .iter()
                .map(|&(x, class, conf)| ScoredBox {
                    bbox: PixelBox::new(x, 0.0, x + 10.0, 10.0),
                    class,
                    conf,
                })
                .collect(),
            latency_ms: None,
        }
    }

    #[test]
    fn perfect_and_empty_predictions() {
        let gt = vec![
            frame(0, &[(0.0, Status::Moving, 1.0), (50.0, Status::Idling, 1.0)]),
            frame(25, &[(100.0, Status::Off, 1.0)]),
        ];
        let r = evaluate(&gt, &gt, &EvalConfig::default()).unwrap();
        assert_eq!(r.map_at(0.5), Some(1.0));
        assert_eq!(r.map_at(0.75), Some(1.0));
        assert_eq!(r.audio.tp + r.audio.tn, 2);

        let empty = vec![frame(0, &[]), frame(25, &[])];
        let r = evaluate(&gt, &empty, &EvalConfig::default()).unwrap();
        for s in Status::ALL {
            assert_eq!(r.ap(0.5, s), Some(0.0));
        }
    }

    #[test]
    fn counts_are_self_consistent() {
        let gt = vec![frame(0, &[(0.0, Status::Idling, 1.0), (30.0, Status::Off, 1.0)])];
        let pr = vec![frame(0, &[(0.0, Status::Idling, 0.9), (30.0, Status::Idling, 0.6)])];
        let r = evaluate(&gt, &pr, &EvalConfig::default()).unwrap();
        let t = r.at(0.5).unwrap();
        let idl = &t.per_class["idling"];
        assert_eq!((idl.tp, idl.fp, idl.fn_), (1, 1, 0));
        assert_eq!(idl.precision, idl.tp as f64 / (idl.tp + idl.fp) as f64);
        assert_eq!(t.per_class["off"].fn_, 1);
        assert_eq!(t.per_class["off"].ap, Some(0.0));
        assert!(t.per_class["moving"].ap.is_none());
        assert_eq!(t.map, Some(0.5));
        assert_eq!((r.audio.tp, r.audio.fp), (1, 1));
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn missing_ground_truth_frame_is_reported() {
        let gt = vec![frame(0, &[])];
        let pr = vec![frame(0, &[]), frame(25, &[])];
        let e = evaluate(&gt, &pr, &EvalConfig::default()).unwrap_err();
        assert!(e.to_string().contains("25"));
    }

    #[test]
    fn latency_percentiles() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let s = summarize_latency(&v, 95.0).unwrap();
        assert_eq!((s.median_ms, s.p99_ms, s.max_ms, s.over_budget), (50.0, 99.0, 100.0, 5));
    }
}
