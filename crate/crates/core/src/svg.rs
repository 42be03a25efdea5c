//! Minimal static SVG line plots.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];
/// Points kept per line after decimation.
const MAX_POINTS: usize = 1500;

#[derive(Debug, Clone)]
pub struct Line {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dashed: bool,
}

impl Line {
    pub fn new(label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { label: label.into(), x, y, dashed: false }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub lines: Vec<Line>,
    /// Same scale on both axes.
    pub equal_aspect: bool,
}

impl Panel {
    pub fn new(title: &str, x_label: &str, lines: Vec<Line>) -> Self {
        Self { title: title.into(), x_label: x_label.into(), lines, equal_aspect: false }
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 1e-3;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Rows of panels, `columns` wide, in a single SVG document.
pub fn render(title: &str, panels: &[Panel], columns: usize) -> String {
    let (pw, ph) = (420.0, 260.0);
    let (ml, mr, mt, mb) = (62.0, 14.0, 28.0, 40.0);
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns);
    let width = pw * columns as f64;
    let height = ph * rows as f64 + 30.0;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(title)).unwrap();

    for (i, panel) in panels.iter().enumerate() {
        let ox = pw * (i % columns) as f64;
        let oy = 30.0 + ph * (i / columns) as f64;
        let (x0, y0) = (ox + ml, oy + mt);
        let (w, h) = (pw - ml - mr, ph - mt - mb);
        let (mut xl, mut xh) = extent(panel.lines.iter().flat_map(|l| l.x.iter().copied()));
        let (mut yl, mut yh) = extent(panel.lines.iter().flat_map(|l| l.y.iter().copied()));
        if panel.equal_aspect {
            let scale = ((xh - xl) / w).max((yh - yl) / h);
            let (cx, cy) = (0.5 * (xl + xh), 0.5 * (yl + yh));
            (xl, xh) = (cx - 0.5 * scale * w, cx + 0.5 * scale * w);
            (yl, yh) = (cy - 0.5 * scale * h, cy + 0.5 * scale * h);
        }
        let px = |x: f64| x0 + (x - xl) / (xh - xl) * w;
        let py = |y: f64| y0 + h - (y - yl) / (yh - yl) * h;

        writeln!(s, r##"<rect x="{x0:.1}" y="{y0:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#444"/>"##).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#, x0 + w / 2.0, oy + 18.0, escape(&panel.title)).unwrap();
        writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, x0 + w / 2.0, y0 + h + 32.0, escape(&panel.x_label)).unwrap();
        for (v, anchor, x) in [(xl, "start", x0), (xh, "end", x0 + w)] {
            writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#, y0 + h + 14.0, label(v)).unwrap();
        }
        for (v, y) in [(yl, y0 + h), (yh, y0 + 10.0)] {
            writeln!(s, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{}</text>"#, x0 - 4.0, label(v)).unwrap();
        }

        for (k, line) in panel.lines.iter().enumerate() {
            let n = line.x.len().min(line.y.len());
            if n == 0 {
                continue;
            }
            let stride = n.div_ceil(MAX_POINTS).max(1);
            let mut pts = String::new();
            for j in (0..n).step_by(stride).chain(std::iter::once(n - 1)) {
                if line.x[j].is_finite() && line.y[j].is_finite() {
                    write!(pts, "{:.1},{:.1} ", px(line.x[j]), py(line.y[j])).unwrap();
                }
            }
            let color = PALETTE[k % PALETTE.len()];
            let dash = if line.dashed { r#" stroke-dasharray="5,3""# } else { "" };
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.3"{dash} points="{}"/>"#, pts.trim_end()).unwrap();
            let ly = y0 + 12.0 + 13.0 * k as f64;
            writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" text-anchor="end" fill="{color}">{}</text>"#, x0 + w - 6.0, escape(&line.label)).unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
