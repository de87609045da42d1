//! Trajectory plots: one polyline per agent, one circle of radius eps per GA.

use std::fmt::Write;

use gathering::engine::{EventKind, Trace, Verdict};
use gathering::geometry::Point;

fn trajectory_points(trace: &Trace, i: usize) -> Vec<Point> {
    let tr = &trace.trajectories[i];
    let mut pts = vec![tr.origin_point];
    pts.extend(tr.segments.iter().map(|s| s.end_point));
    pts.dedup_by(|a, b| a == b);
    pts
}

fn ga_centers(trace: &Trace) -> Vec<Point> {
    trace
        .events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Ga { positions, .. } => {
                let n = positions.len() as f64;
                let (sx, sy) = positions
                    .iter()
                    .fold((0.0, 0.0), |(sx, sy), p| (sx + p[0], sy + p[1]));
                Some(Point::new(sx / n, sy / n))
            }
            _ => None,
        })
        .collect()
}

pub fn render(trace: &Trace, epsilon: f64) -> String {
    let paths: Vec<Vec<Point>> = (0..trace.trajectories.len())
        .map(|i| trajectory_points(trace, i))
        .collect();
    let markers = ga_centers(trace);

    let all = paths.iter().flatten().chain(&markers);
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in all {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let pad = 2.0 * epsilon;
    let (x0, y0, w, h) = (x0 - pad, y0 - pad, x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let stroke = w.max(h) / 400.0;

    let mut out = String::new();
    // y grows upwards in the plane, downwards in SVG
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="{:.0}" viewBox="{x0} {} {w} {h}">"#,
        800.0 * h / w,
        -(y0 + h),
    );
    let _ = writeln!(
        out,
        r#"<g transform="scale(1,-1)" fill="none" stroke-width="{stroke}">"#
    );
    let n = paths.len().max(1);
    for (i, pts) in paths.iter().enumerate() {
        let hue = 360.0 * i as f64 / n as f64;
        let coords: Vec<String> = pts.iter().map(|p| format!("{},{}", p.x, p.y)).collect();
        let _ = writeln!(
            out,
            r#"<polyline class="agent" data-agent="{i}" stroke="hsl({hue:.1},70%,45%)" points="{}"/>"#,
            coords.join(" ")
        );
    }
    for c in &markers {
        let _ = writeln!(
            out,
            r##"<circle class="ga" cx="{}" cy="{}" r="{epsilon}" stroke="#888888" stroke-dasharray="{}"/>"##,
            c.x,
            c.y,
            2.0 * stroke
        );
    }
    if let Verdict::Gathered { point } = trace.verdict {
        let _ = writeln!(
            out,
            r##"<circle class="gather" cx="{}" cy="{}" r="{}" fill="#d62728" stroke="none"/>"##,
            point.x,
            point.y,
            (epsilon / 4.0).max(3.0 * stroke)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}
