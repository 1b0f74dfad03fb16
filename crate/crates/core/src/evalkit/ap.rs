use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Area under the monotone precision envelope at every recall change.
    #[default]
    AllPoint,
    /// Mean of the envelope at recall 0, 0.1, …, 1.
    ElevenPoint,
}

/// Ordered `(recall, precision)` points of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub class: String,
    pub points: Vec<(f64, f64)>,
}

/// One PR point per distinct confidence, sweeping from high to low.
/// Predictions sharing a confidence enter together.
pub fn pr_points(ranked: &[(f64, bool)], n_gt: usize) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..ranked.len()).collect();
    order.sort_by(|&a, &b| ranked[b].0.total_cmp(&ranked[a].0));
    let mut points = Vec::new();
    let (mut tp, mut seen) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let conf = ranked[order[i]].0;
        while i < order.len() && ranked[order[i]].0 == conf {
            tp += usize::from(ranked[order[i]].1);
            seen += 1;
            i += 1;
        }
        let recall = if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 };
        points.push((recall, tp as f64 / seen as f64));
    }
    points
}

/// Interpolated AP of `(confidence, is_true_positive)` predictions against
/// `n_gt` ground truths; `None` when the class has no ground truth.
pub fn average_precision(ranked: &[(f64, bool)], n_gt: usize, interp: Interpolation) -> Option<f64> {
    if n_gt == 0 {
        return None;
    }
    let pts = pr_points(ranked, n_gt);
    // envelope[k] = max precision over points k.. (recall is non-decreasing)
    let mut envelope: Vec<f64> = pts.iter().map(|p| p.1).collect();
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let ap = match interp {
        Interpolation::AllPoint => {
            let mut prev_r = 0.0;
            let mut area = 0.0;
            for (k, &(r, _)) in pts.iter().enumerate() {
                if r > prev_r {
                    area += (r - prev_r) * envelope[k];
                    prev_r = r;
                }
            }
            area
        }
        Interpolation::ElevenPoint => {
            let mut sum = 0.0;
            for j in 0..=10 {
                let level = j as f64 / 10.0;
                let p = pts
                    .iter()
                    .zip(&envelope)
                    .find(|((r, _), _)| *r >= level - 1e-12)
                    .map_or(0.0, |(_, &e)| e);
                sum += p;
            }
            sum / 11.0
        }
    };
    Some(ap.clamp(0.0, 1.0))
}

pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        let all = [(0.9, true), (0.8, true)];
        assert_eq!(average_precision(&all, 2, Interpolation::AllPoint), Some(1.0));
        assert_eq!(average_precision(&[], 3, Interpolation::AllPoint), Some(0.0));
        assert_eq!(average_precision(&all, 0, Interpolation::AllPoint), None);
    }

    #[test]
    fn ranked_walk_example() {
        // recall steps of 1/5 at envelope precisions 1, 3/4, 3/4, 2/3
        let r = [(0.9, true), (0.8, false), (0.7, true), (0.6, true), (0.5, false), (0.4, true)];
        let ap = average_precision(&r, 5, Interpolation::AllPoint).unwrap();
        assert!((ap - 19.0 / 30.0).abs() < 1e-12, "{ap}");
    }

    #[test]
    fn eleven_point() {
        let all = [(0.9, true)];
        assert_eq!(average_precision(&all, 1, Interpolation::ElevenPoint), Some(1.0));
        // recall 0.5 at precision 1: levels 0..=0.5 count, six of eleven
        let half = [(0.9, true)];
        let ap = average_precision(&half, 2, Interpolation::ElevenPoint).unwrap();
        assert!((ap - 6.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn tied_confidences_enter_together() {
        let r = [(0.5, false), (0.5, true)];
        assert_eq!(pr_points(&r, 1), vec![(1.0, 0.5)]);
        assert_eq!(average_precision(&r, 1, Interpolation::AllPoint), Some(0.5));
    }

    #[test]
    fn f_score_values() {
        assert_eq!(f_score(1.0, 1.0), 1.0);
        assert_eq!(f_score(0.0, 0.0), 0.0);
        assert!((f_score(0.7101, 0.6774) - 0.6934).abs() < 5e-5);
        assert!((f_score(0.8780, 0.7506) - 0.8093).abs() < 5e-5);
    }
}
