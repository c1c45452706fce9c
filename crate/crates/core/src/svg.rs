//! Minimal SVG emitters for phase portraits and spanning-growth curves.
//! Presentation-only: the numeric record lives in the JSON/CSV outputs.

use crate::geom::Point;
use crate::inclusion::BranchLabel;
use crate::solution::SolutionWindow;
use std::fmt::Write as _;

const BRANCH1_COLOR: &str = "#1f77b4";
const BRANCH2_COLOR: &str = "#d62728";

fn bounds(points: impl Iterator<Item = Point>) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo.x1 = lo.x1.min(p.x1);
        lo.x2 = lo.x2.min(p.x2);
        hi.x1 = hi.x1.max(p.x1);
        hi.x2 = hi.x2.max(p.x2);
    }
    (lo, hi)
}

/// Phase portrait of a solution with branch-colored pieces and marked
/// switch points. Extra markers carry a label rendered as a hover title.
pub fn phase_portrait(sol: &SolutionWindow, markers: &[(Point, String)]) -> String {
    let (lo, hi) = bounds(
        sol.segments
            .iter()
            .flat_map(|s| s.samples.iter().map(|&(_, p)| p)),
    );
    let span = ((hi.x1 - lo.x1).max(hi.x2 - lo.x2)).max(1e-6);
    let margin = 0.08 * span;
    let width = 640.0;
    let scale = width / (span + 2.0 * margin);
    let to_px = |p: Point| {
        (
            (p.x1 - lo.x1 + margin) * scale,
            // SVG y grows downward
            ((hi.x2 - p.x2) + margin) * scale,
        )
    };
    let height = ((hi.x2 - lo.x2) + 2.0 * margin) * scale;

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.2} {height:.2}\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    for seg in &sol.segments {
        let color = match seg.branch {
            BranchLabel::Branch1 => BRANCH1_COLOR,
            BranchLabel::Branch2 => BRANCH2_COLOR,
        };
        let mut d = String::new();
        for (i, &(_, p)) in seg.samples.iter().enumerate() {
            let (x, y) = to_px(p);
            if i % 8 != 0 && i != seg.samples.len() - 1 {
                continue;
            }
            if d.is_empty() {
                write!(d, "M {x:.2} {y:.2}").unwrap();
            } else {
                write!(d, " L {x:.2} {y:.2}").unwrap();
            }
        }
        writeln!(
            out,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>"
        )
        .unwrap();
    }
    for &t in &sol.switch_times {
        if let Ok(p) = sol.eval(t) {
            let (x, y) = to_px(p);
            writeln!(
                out,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"black\"/>"
            )
            .unwrap();
        }
    }
    for (p, label) in markers {
        let (x, y) = to_px(*p);
        writeln!(
            out,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"4.5\" fill=\"none\" stroke=\"green\" stroke-width=\"1.5\"><title>{label}</title></circle>"
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Simple polyline chart, one series per (label, points) pair.
pub fn line_chart(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let (width, height, pad) = (640.0, 400.0, 48.0);
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (_, pts) in series {
        for &(x, y) in pts {
            xs.push(x);
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return String::from("<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n");
    }
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = (
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let xr = (x1 - x0).max(1e-9);
    let yr = (y1 - y0).max(1e-9);
    let to_px = |x: f64, y: f64| {
        (
            pad + (x - x0) / xr * (width - 2.0 * pad),
            height - pad - (y - y0) / yr * (height - 2.0 * pad),
        )
    };
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"];
    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\">"
    )
    .unwrap();
    writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    writeln!(
        out,
        "<text x=\"{:.0}\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">{title}</text>",
        width / 2.0
    )
    .unwrap();
    writeln!(
        out,
        "<line x1=\"{pad}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#888\"/>",
        height - pad,
        width - pad,
        height - pad
    )
    .unwrap();
    writeln!(
        out,
        "<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{:.1}\" stroke=\"#888\"/>",
        height - pad
    )
    .unwrap();
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = palette[i % palette.len()];
        let mut d = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            let (px, py) = to_px(x, y);
            if j == 0 {
                write!(d, "M {px:.2} {py:.2}").unwrap();
            } else {
                write!(d, " L {px:.2} {py:.2}").unwrap();
            }
            writeln!(
                out,
                "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.5\" fill=\"{color}\"/>"
            )
            .unwrap();
        }
        writeln!(
            out,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{label}</text>",
            width - pad + 4.0,
            pad + 16.0 * i as f64
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
