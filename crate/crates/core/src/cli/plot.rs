//! Static SVG charts for run directories.

use std::fmt::Write;

use crate::kinematics::{PositionSequence, Skeleton};
use crate::optimizer::TraceEntry;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

/// Maps data bounds onto the plot area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(series: &[Series], equal_aspect: bool) -> Self {
        let pts = series.iter().flat_map(|s| s.points.iter());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| if hi - lo < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let (mut x, mut y) = (pad(x0, x1), pad(y0, y1));
        if equal_aspect {
            let sx = (x.1 - x.0) / (W - 2.0 * MARGIN);
            let sy = (y.1 - y.0) / (H - 2.0 * MARGIN);
            let s = sx.max(sy);
            let grow = |r: (f64, f64), px: f64| {
                let c = 0.5 * (r.0 + r.1);
                (c - 0.5 * s * px, c + 0.5 * s * px)
            };
            x = grow(x, W - 2.0 * MARGIN);
            y = grow(y, H - 2.0 * MARGIN);
        }
        Self { x, y }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let u = MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN);
        let v = H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN);
        (u, v)
    }
}

fn chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series], equal_aspect: bool, markers: bool) -> String {
    let fr = Frame::fit(series, equal_aspect);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, W / 2.0, escape(title));
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(s, r##"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="#444"/>"##, r - l, b - t);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = fr.x.0 + f * (fr.x.1 - fr.x.0);
        let yv = fr.y.0 + f * (fr.y.1 - fr.y.0);
        let (u, _) = fr.px(xv, fr.y.0);
        let (_, v) = fr.px(fr.x.0, yv);
        let _ = writeln!(s, r##"<line x1="{u:.1}" y1="{t}" x2="{u:.1}" y2="{b}" stroke="#ddd"/>"##);
        let _ = writeln!(s, r##"<line x1="{l}" y1="{v:.1}" x2="{r}" y2="{v:.1}" stroke="#ddd"/>"##);
        let _ = writeln!(s, r#"<text x="{u:.1}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, tick(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, l - 6.0, v + 4.0, tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 14.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    for (i, se) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = se
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| {
                let (u, v) = fr.px(x, y);
                format!("{u:.2},{v:.2}")
            })
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#, pts.join(" "));
        if markers {
            for (k, shape) in [(0, "circle"), (pts.len().saturating_sub(1), "rect")] {
                let Some(p) = pts.get(k) else { continue };
                let (u, v) = p.split_once(',').unwrap_or(("0", "0"));
                if shape == "circle" {
                    let _ = writeln!(s, r#"<circle cx="{u}" cy="{v}" r="4" fill="{color}"/>"#);
                } else {
                    let _ = writeln!(s, r#"<rect x="{u}" y="{v}" width="7" height="7" transform="translate(-3.5 -3.5)" fill="{color}"/>"#);
                }
            }
        }
        let ly = t + 14.0 + 16.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, r - 120.0, r - 100.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, r - 94.0, ly + 4.0, escape(&se.name));
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Top-down view of the root trajectory; circle marks the start, square
/// the end.
pub fn root_path(pos: &PositionSequence) -> String {
    let points = pos.pos.iter().map(|f| (f[0][0], f[0][2])).collect();
    chart("Root path (top-down)", "x (m)", "z (m)", &[Series { name: "pelvis".into(), points }], true, true)
}

/// Height over time of the feet, hands, head and pelvis.
pub fn heights(skeleton: &Skeleton, pos: &PositionSequence) -> String {
    let names = ["pelvis", "head", "left_hand", "right_hand", "left_foot", "right_foot"];
    let series: Vec<Series> = names
        .iter()
        .filter_map(|n| skeleton.joint_index(n))
        .map(|j| Series {
            name: skeleton.joints[j].name.clone(),
            points: pos.pos.iter().enumerate().map(|(t, f)| (t as f64, f[j][1])).collect(),
        })
        .collect();
    chart("Joint heights", "frame", "y (m)", &series, false, false)
}

/// Objective per optimizer step on a log10 axis.
pub fn trace(trace: &[TraceEntry]) -> String {
    let floor = 1e-12;
    let points = trace.iter().enumerate().map(|(i, e)| (i as f64, e.total.max(floor).log10())).collect();
    chart("Optimization trace", "step", "log10 objective", &[Series { name: "objective".into(), points }], false, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{default_skeleton, forward_kinematics, MotionSequence};

    fn walk() -> PositionSequence {
        let mut m = MotionSequence::rest(10, 22, 20.0);
        for (t, f) in m.frames.iter_mut().enumerate() {
            f.root_pos[2] = 0.1 * t as f64;
        }
        forward_kinematics(&default_skeleton(), &m).unwrap()
    }

    #[test]
    fn svgs_are_well_formed() {
        let pos = walk();
        let tr: Vec<TraceEntry> =
            (0..5).map(|i| TraceEntry { total: 1.0 / (1 + i) as f64, per_term: vec![] }).collect();
        for svg in [root_path(&pos), heights(&default_skeleton(), &pos), trace(&tr)] {
            assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
            assert!(svg.contains("<polyline"));
            assert!(!svg.contains("NaN"));
        }
        assert_eq!(heights(&default_skeleton(), &pos).matches("<polyline").count(), 6);
    }

    #[test]
    fn degenerate_data_still_draws() {
        let pos = PositionSequence { pos: vec![vec![[0.0; 3]; 22]; 3] };
        let svg = root_path(&pos);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
        assert!(trace(&[TraceEntry { total: 0.0, per_term: vec![] }]).contains("<polyline"));
    }
}
