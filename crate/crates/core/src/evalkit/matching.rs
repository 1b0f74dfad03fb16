use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{PixelBox, Status};

/// Intersection over union. Zero-area boxes score 0 unless both boxes are identical.
pub fn iou(a: &PixelBox, b: &PixelBox) -> f64 {
    if a.area() <= 0.0 || b.area() <= 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    let w = (a.x1.min(b.x1) - a.x0.max(b.x0)).max(0.0);
    let h = (a.y1.min(b.y1) - a.y0.max(b.y0)).max(0.0);
    let inter = w * h;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub iou_threshold: f64,
    /// Only pairs with equal class may match.
    pub class_aware: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            class_aware: true,
        }
    }
}

impl MatchConfig {
    pub fn at(iou_threshold: f64) -> Self {
        Self {
            iou_threshold,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold <= 1.0) {
            return Err(Error::config(format!(
                "iou threshold must lie in (0, 1], got {}",
                self.iou_threshold
            )));
        }
        Ok(())
    }
}

/// A labelled box with a ranking confidence (1.0 for ground truth).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredBox {
    pub bbox: PixelBox,
    pub class: Status,
    pub conf: f64,
}

/// Indices into the prediction and ground-truth lists of one frame.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameMatch {
    pub tp: Vec<(usize, usize)>,
    pub fp: Vec<usize>,
    pub fn_: Vec<usize>,
}

/// Predictions in descending confidence (ties by index); each takes the
/// unmatched eligible ground truth of highest IOU at or above the threshold
/// (ties by lowest index).
pub fn match_detections(preds: &[ScoredBox], gts: &[ScoredBox], cfg: &MatchConfig) -> FrameMatch {
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[b].conf.total_cmp(&preds[a].conf).then(a.cmp(&b)));
    let mut taken = vec![false; gts.len()];
    let mut out = FrameMatch::default();
    for p in order {
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] || (cfg.class_aware && gt.class != preds[p].class) {
                continue;
            }
            let v = iou(&preds[p].bbox, &gt.bbox);
            if v >= cfg.iou_threshold && best.is_none_or(|(_, bv)| v > bv) {
                best = Some((g, v));
            }
        }
        match best {
            Some((g, _)) => {
                taken[g] = true;
                out.tp.push((p, g));
            }
            None => out.fp.push(p),
        }
    }
    out.fn_ = (0..gts.len()).filter(|&g| !taken[g]).collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sb(x0: f64, y0: f64, x1: f64, y1: f64, class: Status, conf: f64) -> ScoredBox {
        ScoredBox {
            bbox: PixelBox::new(x0, y0, x1, y1),
            class,
            conf,
        }
    }

    #[test]
    fn iou_examples() {
        let a = PixelBox::new(0.0, 0.0, 10.0, 10.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &PixelBox::new(20.0, 20.0, 30.0, 30.0)), 0.0);
        assert!((iou(&a, &PixelBox::new(5.0, 0.0, 15.0, 10.0)) - 1.0 / 3.0).abs() < 1e-15);
        let z = PixelBox::new(3.0, 3.0, 3.0, 8.0);
        assert_eq!(iou(&z, &z), 1.0);
        assert_eq!(iou(&z, &a), 0.0);
    }

    #[test]
    fn matching_examples() {
        let gt = [sb(0.0, 0.0, 10.0, 10.0, Status::Idling, 1.0)];
        let m = match_detections(&gt, &gt, &MatchConfig::default());
        assert_eq!((m.tp.len(), m.fp.len(), m.fn_.len()), (1, 0, 0));

        let m = match_detections(&gt, &[], &MatchConfig::default());
        assert_eq!(m.fp, vec![0]);

        // conf 0.9 overlaps the gt with IOU 0.8, conf 0.8 with IOU 0.9
        let g = [sb(0.0, 0.0, 10.0, 10.0, Status::Off, 1.0)];
        let p = [
            sb(0.0, 0.0, 8.0, 10.0, Status::Off, 0.9),
            sb(0.0, 0.0, 9.0, 10.0, Status::Off, 0.8),
        ];
        assert!((iou(&p[0].bbox, &g[0].bbox) - 0.8).abs() < 1e-12);
        assert!((iou(&p[1].bbox, &g[0].bbox) - 0.9).abs() < 1e-12);
        let m = match_detections(&p, &g, &MatchConfig::default());
        assert_eq!(m.tp, vec![(0, 0)]);
        assert_eq!(m.fp, vec![1]);
    }

    #[test]
    fn class_gating() {
        let g = [sb(0.0, 0.0, 10.0, 10.0, Status::Off, 1.0)];
        let p = [sb(0.0, 0.0, 10.0, 10.0, Status::Idling, 0.7)];
        let m = match_detections(&p, &g, &MatchConfig::default());
        assert_eq!((m.tp.len(), m.fp.len(), m.fn_.len()), (0, 1, 1));
        let agnostic = MatchConfig {
            class_aware: false,
            ..Default::default()
        };
        assert_eq!(match_detections(&p, &g, &agnostic).tp, vec![(0, 0)]);
    }

    fn arb_box() -> impl Strategy<Value = PixelBox> {
        (0.0..100.0f64, 0.0..100.0f64, 0.0..40.0f64, 0.0..40.0f64).prop_map(|(x, y, w, h)| PixelBox::new(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn tp_count_monotone_in_threshold(
            preds in prop::collection::vec((arb_box(), 0.0..1.0f64), 0..8),
            gts in prop::collection::vec(arb_box(), 0..8),
            t1 in 0.05..1.0f64, t2 in 0.05..1.0f64,
        ) {
            let p: Vec<ScoredBox> = preds.iter().map(|&(b, c)| ScoredBox { bbox: b, class: Status::Moving, conf: c }).collect();
            let g: Vec<ScoredBox> = gts.iter().map(|&b| ScoredBox { bbox: b, class: Status::Moving, conf: 1.0 }).collect();
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let a = match_detections(&p, &g, &MatchConfig::at(lo)).tp.len();
            let b = match_detections(&p, &g, &MatchConfig::at(hi)).tp.len();
            prop_assert!(b <= a);
        }
    }
}
