//! Minimal SVG charts: line plots and box summaries.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.max(1e-12).log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        Axis { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.max(1e-12).log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn label(&self, u: f64) -> String {
        let v = self.lo + u * (self.hi - self.lo);
        if self.log {
            format!("{:.3e}", 10f64.powf(v))
        } else {
            format!("{v:.3}")
        }
    }
}

fn px(u: f64) -> f64 {
    MARGIN + u * (WIDTH - 2.0 * MARGIN)
}

fn py(u: f64) -> f64 {
    HEIGHT - MARGIN - u * (HEIGHT - 2.0 * MARGIN)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(out: &mut String, title: &str, x_label: &str, y_label: &str, y: &Axis) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(
        out,
        r#"<rect width="100%" height="100%" fill="white"/><text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = write!(
        out,
        r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><line x1="{0}" y1="{1}" x2="{0}" y2="{3}" stroke="black"/>"#,
        px(0.0),
        py(0.0),
        px(1.0),
        py(1.0)
    );
    for i in 0..=4 {
        let u = i as f64 / 4.0;
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            px(0.0) - 4.0,
            py(u) + 4.0,
            y.label(u)
        );
    }
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text><text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(x_label),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
}

/// Line plot of several series, optionally with a log-scaled y axis.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let xs = Axis::new(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), false);
    let ys = Axis::new(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), log_y);
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label, &ys);
    for i in 0..=4 {
        let u = i as f64 / 4.0;
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px(u),
            py(0.0) + 16.0,
            xs.label(u)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(xs.unit(x)), py(ys.unit(y))))
            .collect();
        let _ = write!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        for p in &pts {
            let (cx, cy) = p.split_once(',').unwrap();
            let _ = write!(out, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#);
        }
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" fill="{color}">{}</text>"#,
            px(1.0) - 120.0,
            py(1.0) + 16.0 * k as f64,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Box summary (min, quartiles, max) per group.
pub fn box_plot(title: &str, y_label: &str, groups: &[(String, Vec<f64>)], log_y: bool) -> String {
    let ys = Axis::new(groups.iter().flat_map(|g| g.1.iter().copied()), log_y);
    let mut out = String::new();
    frame(&mut out, title, "", y_label, &ys);
    let slot = 1.0 / groups.len().max(1) as f64;
    for (k, (label, values)) in groups.iter().enumerate() {
        let mut v = values.clone();
        v.sort_by(f64::total_cmp);
        let cx = px(slot * (k as f64 + 0.5));
        let half = 0.3 * slot * (WIDTH - 2.0 * MARGIN);
        let color = COLORS[k % COLORS.len()];
        if !v.is_empty() {
            let q = |f: f64| {
                let pos = f * (v.len() - 1) as f64;
                let (i, t) = (pos.floor() as usize, pos.fract());
                let hi = v[(i + 1).min(v.len() - 1)];
                py(ys.unit(v[i] + t * (hi - v[i])))
            };
            let (lo, q1, med, q3, hi) = (q(0.0), q(0.25), q(0.5), q(0.75), q(1.0));
            let _ = write!(
                out,
                r#"<line x1="{cx}" y1="{lo}" x2="{cx}" y2="{hi}" stroke="{color}"/><rect x="{}" y="{q3}" width="{}" height="{}" fill="white" stroke="{color}"/><line x1="{}" y1="{med}" x2="{}" y2="{med}" stroke="{color}" stroke-width="2"/>"#,
                cx - half,
                2.0 * half,
                (q1 - q3).max(0.5),
                cx - half,
                cx + half
            );
        }
        let _ = write!(
            out,
            r#"<text x="{cx}" y="{}" text-anchor="middle">{}</text>"#,
            py(0.0) + 16.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}
