//! Human-readable and plot-friendly renderings of evaluation results.

use std::fmt::Write as _;

use super::ap::PrCurve;
use super::report::EvalReport;
use super::trajectory::Trajectory;
use crate::types::Status;

pub fn pr_curve_csv(curves: &[PrCurve]) -> String {
    let mut s = String::from("class,recall,precision\n");
    for c in curves {
        for &(r, p) in &c.points {
            let _ = writeln!(s, "{},{r:.6},{p:.6}", c.class);
        }
    }
    s
}

pub fn trajectories_csv(tracks: &[Trajectory]) -> String {
    let mut s = String::from("id,t,x,y,status\n");
    for tr in tracks {
        for p in &tr.points {
            let _ = writeln!(s, "{},{:.3},{:.3},{:.3},{}", tr.id, p.t, p.x, p.y, p.status);
        }
    }
    s
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{:.4}", x))
}

/// Table with one row per IOU threshold: mAP and the per-class APs.
pub fn report_table(r: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "frames evaluated: {}", r.n_frames);
    let _ = writeln!(s, "{:<8} {:>8} {:>10} {:>10} {:>10}", "IOU", "mAP", "AP idling", "AP off", "AP moving");
    for t in &r.thresholds {
        let ap = |c: Status| fmt_opt(t.per_class.get(c.as_str()).and_then(|x| x.ap));
        let _ = writeln!(
            s,
            "{:<8.2} {:>8} {:>10} {:>10} {:>10}",
            t.iou_threshold,
            fmt_opt(t.map),
            ap(Status::Idling),
            ap(Status::Off),
            ap(Status::Moving)
        );
    }
    let a = &r.audio;
    let _ = writeln!(
        s,
        "audio stage: precision {:.4} recall {:.4} F-score {:.4} (tp {} fp {} fn {} tn {})",
        a.precision, a.recall, a.f_score, a.tp, a.fp, a.fn_, a.tn
    );
    if let Some(l) = &r.latency {
        let _ = writeln!(
            s,
            "latency: median {:.1} ms, p99 {:.1} ms, max {:.1} ms, {} over budget",
            l.median_ms, l.p99_ms, l.max_ms, l.over_budget
        );
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn polyline(points: &[(f64, f64)], color: &str) -> String {
    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        pts.join(" ")
    )
}

/// PR curves on a 400×400 plot, recall along x.
pub fn pr_curves_svg(curves: &[PrCurve]) -> String {
    let (w, h, m) = (400.0, 400.0, 40.0);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    let _ = writeln!(
        s,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        w - 2.0 * m,
        h - 2.0 * m
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts = vec![(0.0, c.points.first().map_or(0.0, |p| p.1))];
        pts.extend(c.points.iter().copied());
        let mapped: Vec<(f64, f64)> =
            pts.iter().map(|&(r, p)| (m + r * (w - 2.0 * m), h - m - p * (h - 2.0 * m))).collect();
        s += &polyline(&mapped, color);
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{}</text>",
            m + 5.0,
            m + 15.0 * (i as f64 + 1.0),
            c.class
        );
    }
    s += "</svg>\n";
    s
}

/// Centroid x against time for every trajectory.
pub fn trajectories_svg(tracks: &[Trajectory]) -> String {
    let (w, h, m) = (600.0, 400.0, 40.0);
    let all = tracks.iter().flat_map(|t| t.points.iter());
    let (mut t_max, mut x_max) = (1e-9f64, 1e-9f64);
    for p in all {
        t_max = t_max.max(p.t);
        x_max = x_max.max(p.x);
    }
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    for (i, tr) in tracks.iter().enumerate() {
        let mapped: Vec<(f64, f64)> = tr
            .points
            .iter()
            .map(|p| (m + p.t / t_max * (w - 2.0 * m), h - m - p.x / x_max * (h - 2.0 * m)))
            .collect();
        s += &polyline(&mapped, PALETTE[i % PALETTE.len()]);
    }
    s += "</svg>\n";
    s
}
