//! Minimal, dependency-free SVG line plots and heatmaps.
//!
//! Output is deterministic: coordinates are printed with two decimals, elements in insertion
//! order, and nothing refers to external resources.

use std::fmt::Write;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

const MARGIN_LEFT: f64 = 62.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 44.0;

#[derive(Debug, Clone)]
struct Series {
    points: Vec<(f64, f64)>,
    color: String,
    label: Option<String>,
    dashed: bool,
}

#[derive(Debug, Clone)]
struct HLine {
    y: f64,
    color: String,
    label: Option<String>,
}

#[derive(Debug, Clone)]
struct Marker {
    x: f64,
    y: f64,
    color: String,
    label: Option<String>,
}

#[derive(Debug, Clone)]
struct Cell {
    x: (f64, f64),
    y: (f64, f64),
    color: String,
    title: String,
}

#[derive(Debug, Clone, Default)]
pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    x_range: Option<(f64, f64)>,
    y_range: Option<(f64, f64)>,
    series: Vec<Series>,
    hlines: Vec<HLine>,
    markers: Vec<Marker>,
    cells: Vec<Cell>,
    legend: Vec<(String, String)>,
}

impl Plot {
    pub fn new(title: impl Into<String>) -> Self {
        Plot {
            title: title.into(),
            ..Plot::default()
        }
    }

    pub fn labels(mut self, x: impl Into<String>, y: impl Into<String>) -> Self {
        self.x_label = x.into();
        self.y_label = y.into();
        self
    }

    pub fn x_range(mut self, lo: f64, hi: f64) -> Self {
        self.x_range = Some((lo, hi));
        self
    }

    pub fn y_range(mut self, lo: f64, hi: f64) -> Self {
        self.y_range = Some((lo, hi));
        self
    }

    pub fn line(
        &mut self,
        points: Vec<(f64, f64)>,
        color: &str,
        label: Option<String>,
    ) -> &mut Self {
        self.push_series(points, color, label, false)
    }

    pub fn dashed_line(
        &mut self,
        points: Vec<(f64, f64)>,
        color: &str,
        label: Option<String>,
    ) -> &mut Self {
        self.push_series(points, color, label, true)
    }

    fn push_series(
        &mut self,
        points: Vec<(f64, f64)>,
        color: &str,
        label: Option<String>,
        dashed: bool,
    ) -> &mut Self {
        let points = points
            .into_iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        self.series.push(Series {
            points,
            color: color.to_string(),
            label,
            dashed,
        });
        self
    }

    pub fn hline(&mut self, y: f64, color: &str, label: Option<String>) -> &mut Self {
        self.hlines.push(HLine {
            y,
            color: color.to_string(),
            label,
        });
        self
    }

    pub fn marker(&mut self, x: f64, y: f64, color: &str, label: Option<String>) -> &mut Self {
        self.markers.push(Marker {
            x,
            y,
            color: color.to_string(),
            label,
        });
        self
    }

    pub fn cell(
        &mut self,
        x: (f64, f64),
        y: (f64, f64),
        color: &str,
        title: impl Into<String>,
    ) -> &mut Self {
        self.cells.push(Cell {
            x,
            y,
            color: color.to_string(),
            title: title.into(),
        });
        self
    }

    /// Extra legend entry not tied to a drawn element (heatmap classes).
    pub fn legend_entry(&mut self, color: &str, label: impl Into<String>) -> &mut Self {
        self.legend.push((color.to_string(), label.into()));
        self
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            xs.extend(s.points.iter().map(|p| p.0));
            ys.extend(s.points.iter().map(|p| p.1));
        }
        for m in &self.markers {
            xs.push(m.x);
            ys.push(m.y);
        }
        for c in &self.cells {
            xs.extend([c.x.0, c.x.1]);
            ys.extend([c.y.0, c.y.1]);
        }
        ys.extend(self.hlines.iter().map(|h| h.y));
        let span = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() || !hi.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let x = self.x_range.unwrap_or_else(|| span(&xs));
        let y = self.y_range.unwrap_or_else(|| {
            let (lo, hi) = span(&ys);
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        });
        (x, y)
    }

    /// Standalone document.
    pub fn to_svg(&self, width: f64, height: f64) -> String {
        let mut out = String::new();
        open_document(&mut out, width, height);
        self.render(&mut out, 0, 0.0, 0.0, width, height);
        out.push_str("</svg>\n");
        out
    }

    fn render(&self, out: &mut String, id: usize, ox: f64, oy: f64, width: f64, height: f64) {
        let ((x0, x1), (y0, y1)) = self.bounds();
        let (left, top) = (ox + MARGIN_LEFT, oy + MARGIN_TOP);
        let (pw, ph) = (
            width - MARGIN_LEFT - MARGIN_RIGHT,
            height - MARGIN_TOP - MARGIN_BOTTOM,
        );
        let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

        let _ = writeln!(
            out,
            r#"<g class="panel"><clipPath id="clip{id}"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
            num(left),
            num(top),
            num(pw),
            num(ph)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white" stroke="black"/>"#,
            num(left),
            num(top),
            num(pw),
            num(ph)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
            num(left + pw / 2.0),
            num(oy + 20.0),
            escape(&self.title)
        );

        for t in ticks(x0, x1) {
            let x = px(t);
            let _ = writeln!(
                out,
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" text-anchor="middle" font-size="11">{4}</text>"#,
                num(x),
                num(top + ph),
                num(top + ph + 4.0),
                num(top + ph + 16.0),
                tick_label(t, x0, x1)
            );
        }
        for t in ticks(y0, y1) {
            let y = py(t);
            let _ = writeln!(
                out,
                r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text x="{3}" y="{4}" text-anchor="end" font-size="11">{5}</text>"#,
                num(left - 4.0),
                num(y),
                num(left),
                num(left - 6.0),
                num(y + 4.0),
                tick_label(t, y0, y1)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            num(left + pw / 2.0),
            num(top + ph + 34.0),
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{0}" y="{1}" text-anchor="middle" font-size="12" transform="rotate(-90 {0} {1})">{2}</text>"#,
            num(ox + 16.0),
            num(top + ph / 2.0),
            escape(&self.y_label)
        );

        let _ = writeln!(out, r#"<g clip-path="url(#clip{id})">"#);
        for c in &self.cells {
            let (xa, xb) = (px(c.x.0), px(c.x.1));
            let (ya, yb) = (py(c.y.1), py(c.y.0));
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"><title>{}</title></rect>"#,
                num(xa),
                num(ya),
                num(xb - xa),
                num(yb - ya),
                c.color,
                escape(&c.title)
            );
        }
        for h in &self.hlines {
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{2}" x2="{}" y2="{2}" stroke="{3}" stroke-dasharray="2 3"/>"#,
                num(left),
                num(left + pw),
                num(py(h.y)),
                h.color
            );
        }
        for s in &self.series {
            let pts = decimate(s.points.iter().map(|&(x, y)| (px(x), py(y))));
            if pts.is_empty() {
                continue;
            }
            let mut d = String::with_capacity(pts.len() * 16);
            for (i, (x, y)) in pts.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{},{}",
                    if i == 0 { "" } else { " " },
                    num(*x),
                    num(*y)
                );
            }
            let dash = if s.dashed {
                r#" stroke-dasharray="6 4""#
            } else {
                ""
            };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{d}"/>"#,
                s.color
            );
        }
        for m in &self.markers {
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="4" fill="{}" stroke="black"/>"#,
                num(px(m.x)),
                num(py(m.y)),
                m.color
            );
        }
        out.push_str("</g>\n");

        let entries: Vec<(&str, &str)> = self
            .series
            .iter()
            .filter_map(|s| s.label.as_deref().map(|l| (s.color.as_str(), l)))
            .chain(
                self.hlines
                    .iter()
                    .filter_map(|h| h.label.as_deref().map(|l| (h.color.as_str(), l))),
            )
            .chain(
                self.markers
                    .iter()
                    .filter_map(|m| m.label.as_deref().map(|l| (m.color.as_str(), l))),
            )
            .chain(self.legend.iter().map(|(c, l)| (c.as_str(), l.as_str())))
            .collect();
        if !entries.is_empty() {
            let _ = writeln!(
                out,
                r##"<rect x="{}" y="{}" width="164" height="{}" fill="white" fill-opacity="0.85" stroke="#cccccc"/>"##,
                num(left + pw - 170.0),
                num(top + 2.0),
                num(15.0 * entries.len() as f64 + 4.0)
            );
        }
        for (i, (color, label)) in entries.iter().enumerate() {
            let y = top + 14.0 + 15.0 * i as f64;
            let x = left + pw - 164.0;
            let _ = writeln!(
                out,
                r#"<rect x="{}" y="{}" width="12" height="8" fill="{color}"/><text x="{}" y="{}" font-size="11">{}</text>"#,
                num(x),
                num(y - 8.0),
                num(x + 16.0),
                num(y),
                escape(label)
            );
        }
        out.push_str("</g>\n");
    }
}

/// Panels laid out row-major in `cols` columns.
pub fn panels(title: &str, plots: &[Plot], cols: usize, panel_w: f64, panel_h: f64) -> String {
    let cols = cols.max(1);
    let rows = plots.len().div_ceil(cols).max(1);
    let header = 28.0;
    let (w, h) = (panel_w * cols as f64, header + panel_h * rows as f64);
    let mut out = String::new();
    open_document(&mut out, w, h);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="16">{}</text>"#,
        num(w / 2.0),
        escape(title)
    );
    for (i, p) in plots.iter().enumerate() {
        let (r, c) = (i / cols, i % cols);
        p.render(
            &mut out,
            i,
            c as f64 * panel_w,
            header + r as f64 * panel_h,
            panel_w,
            panel_h,
        );
    }
    out.push_str("</svg>\n");
    out
}

fn open_document(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="sans-serif">"#,
        num(width),
        num(height)
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

/// Drops points closer than a quarter pixel to the last kept one; the last point is kept.
fn decimate(points: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut pending = None;
    for p in points {
        match out.last() {
            Some(&(lx, ly)) if (p.0 - lx).abs() < 0.25 && (p.1 - ly).abs() < 0.25 => {
                pending = Some(p)
            }
            _ => {
                out.push(p);
                pending = None;
            }
        }
    }
    out.extend(pending);
    out
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64, lo: f64, hi: f64) -> String {
    let step = ticks(lo, hi)
        .windows(2)
        .map(|w| w[1] - w[0])
        .next()
        .unwrap_or(1.0);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_choice() {
        assert_eq!(ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(ticks(0.0, 1.0).len(), 6);
        assert_eq!(tick_label(0.5, 0.0, 1.0), "0.5");
        assert_eq!(tick_label(-0.0, -1.0, 1.0), "0.0");
    }

    #[test]
    fn decimation_keeps_ends() {
        let pts: Vec<(f64, f64)> = (0..1000).map(|i| (i as f64 * 0.01, 5.0)).collect();
        let d = decimate(pts.into_iter());
        assert_eq!(d.first(), Some(&(0.0, 5.0)));
        assert_eq!(d.last(), Some(&(9.99, 5.0)));
        assert!(d.len() < 50);
    }

    #[test]
    fn text_is_escaped() {
        let mut p = Plot::new("a < b & \"c\"");
        p.line(vec![(0.0, 0.0), (1.0, 1.0)], PALETTE[0], Some("x<y".into()));
        let svg = p.to_svg(400.0, 300.0);
        assert!(svg.contains("a &lt; b &amp; &quot;c&quot;"));
        assert!(svg.contains("x&lt;y"));
        assert!(!svg.contains("NaN"));
    }
}
