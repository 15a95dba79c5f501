//! Minimal static SVG renderings.

use std::fmt::Write;

use crate::grid::Field;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

/// Log-log polyline of `(d, y)` with labelled end points.
pub fn loglog_svg(points: &[(usize, f64)], label: &str) -> String {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, y)| *y > 0.0)
        .map(|&(d, y)| ((d as f64).ln(), y.ln()))
        .collect();
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#).ok();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).ok();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{label} against d (log-log)</text>"#, W / 2.0).ok();
    if pts.len() >= 2 {
        let (x0, x1) = bounds(pts.iter().map(|p| p.0));
        let (y0, y1) = bounds(pts.iter().map(|p| p.1));
        let px = |x: f64| PAD + (x - x0) / (x1 - x0).max(1e-12) * (W - 2.0 * PAD);
        let py = |y: f64| H - PAD - (y - y0) / (y1 - y0).max(1e-12) * (H - 2.0 * PAD);
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#, path.join(" ")).ok();
        for (&(d, y), &(x, ly)) in points.iter().filter(|(_, y)| *y > 0.0).zip(&pts) {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, px(x), py(ly)).ok();
            writeln!(s, r#"<text x="{:.2}" y="{:.2}">d={d}, {y:.3e}</text>"#, px(x) + 5.0, py(ly) - 5.0).ok();
        }
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)))
}

/// Grey-scale heatmap, time downwards, position to the right.
pub fn heatmap_svg(field: &Field, label: &str) -> String {
    let (nt, nv) = field.values.dim();
    let (lo, hi) = bounds(field.values.iter().cloned());
    let span = (hi - lo).max(1e-300);
    let cw = (W - 2.0 * PAD) / nv as f64;
    let ch = (H - 2.0 * PAD) / nt as f64;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#).ok();
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).ok();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{label}: t down, v right, range [{lo:.3}, {hi:.3}]</text>"#, W / 2.0).ok();
    for j in 0..nt {
        for i in 0..nv {
            let g = (255.0 * (field.values[[j, i]] - lo) / span).round() as u8;
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                PAD + i as f64 * cw,
                PAD + j as f64 * ch,
                cw + 0.05,
                ch + 0.05
            )
            .ok();
        }
    }
    s.push_str("</svg>\n");
    s
}
