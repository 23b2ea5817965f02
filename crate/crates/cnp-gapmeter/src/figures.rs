//! Dependency-free SVG charts for sweep results.
//!
//! Rate panels use log-log axes so power-law decay shows as a straight line;
//! the ratio panel keeps a linear y axis around 1. Charts are built from
//! parsed trial records (never from live sweep state), so figure emission
//! cannot alter numeric outputs.

use crate::harness::{ratio_to_bound_curve, TrialRecord};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 76.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// How a series is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DrawStyle {
    Line,
    Points,
}

/// One named data series.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: DrawStyle,
}

/// A chart specification renderable to a standalone SVG document.
#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log: bool,
    pub y_log: bool,
    pub series: Vec<Series>,
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str, x_log: bool, y_log: bool) -> Self {
        Chart {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_log,
            y_log,
            series: Vec::new(),
        }
    }

    pub fn with_series(mut self, label: &str, points: Vec<(f64, f64)>, style: DrawStyle) -> Self {
        self.series.push(Series {
            label: label.to_string(),
            points,
            style,
        });
        self
    }

    fn usable(&self, p: (f64, f64)) -> bool {
        p.0.is_finite()
            && p.1.is_finite()
            && (!self.x_log || p.0 > 0.0)
            && (!self.y_log || p.1 > 0.0)
    }

    /// Render the chart as an SVG document string.
    pub fn render_svg(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .filter(|&p| self.usable(p))
            .collect();

        let (x0, x1) = axis_range(pts.iter().map(|p| p.0), self.x_log);
        let (y0, y1) = axis_range(pts.iter().map(|p| p.1), self.y_log);

        let to_px = |v: f64, log: bool, lo: f64, hi: f64| -> f64 {
            let (v, lo, hi) = if log {
                (v.log10(), lo.log10(), hi.log10())
            } else {
                (v, lo, hi)
            };
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.5
            }
        };
        let px = |x: f64| {
            MARGIN_LEFT + to_px(x, self.x_log, x0, x1) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
        };
        let py = |y: f64| {
            HEIGHT
                - MARGIN_BOTTOM
                - to_px(y, self.y_log, y0, y1) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
        };

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
        ));
        svg.push_str(&format!(
            "  <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // axes box
        svg.push_str(&format!(
            "  <rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"none\" stroke=\"black\"/>\n",
            WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
            HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
        ));

        for (value, label) in ticks(x0, x1, self.x_log) {
            let x = px(value);
            svg.push_str(&format!(
                "  <line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
                HEIGHT - MARGIN_BOTTOM,
                HEIGHT - MARGIN_BOTTOM + 5.0
            ));
            svg.push_str(&format!(
                "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"11\">{label}</text>\n",
                HEIGHT - MARGIN_BOTTOM + 18.0
            ));
        }
        for (value, label) in ticks(y0, y1, self.y_log) {
            let y = py(value);
            svg.push_str(&format!(
                "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{MARGIN_LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
                MARGIN_LEFT - 5.0
            ));
            svg.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{label}</text>\n",
                MARGIN_LEFT - 8.0,
                y + 4.0
            ));
        }

        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
            MARGIN_LEFT + (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "  <text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\" \
             transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
            MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / 2.0,
            MARGIN_TOP + (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / 2.0,
            escape(&self.y_label)
        ));

        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let visible: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|&p| self.usable(p))
                .collect();
            match s.style {
                DrawStyle::Line => {
                    if visible.len() >= 2 {
                        let path: Vec<String> = visible
                            .iter()
                            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                            .collect();
                        svg.push_str(&format!(
                            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                            path.join(" ")
                        ));
                    }
                }
                DrawStyle::Points => {
                    for (x, y) in visible {
                        svg.push_str(&format!(
                            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{color}\" fill-opacity=\"0.6\"/>\n",
                            px(x),
                            py(y)
                        ));
                    }
                }
            }
            // legend
            let ly = MARGIN_TOP + 16.0 + 16.0 * i as f64;
            let lx = WIDTH - MARGIN_RIGHT - 150.0;
            svg.push_str(&format!(
                "  <line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                lx + 18.0
            ));
            svg.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>\n",
                lx + 24.0,
                ly + 4.0,
                escape(&s.label)
            ));
        }

        svg.push_str("</svg>\n");
        svg
    }
}

fn axis_range(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return if log { (0.1, 10.0) } else { (0.0, 1.0) };
    }
    if log {
        (lo / 1.25, hi * 1.25)
    } else {
        let pad = 0.05 * (hi - lo).max(1e-12);
        (lo - pad, hi + pad)
    }
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<(f64, String)> {
    if log {
        let k0 = lo.log10().ceil() as i32;
        let k1 = hi.log10().floor() as i32;
        (k0..=k1)
            .map(|k| {
                let v = 10f64.powi(k);
                (v, format!("1e{k}"))
            })
            .collect()
    } else {
        let span = hi - lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|&s| span / s <= 6.0)
            .unwrap_or(mag * 10.0);
        let mut t = (lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= hi + 1e-12 * span {
            out.push((t, trim_tick(t, step)));
            t += step;
        }
        out
    }
}

fn trim_tick(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    format!("{v:.decimals$}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Log-log gap-versus-n panel from parsed records: per-`n` maximal deltas as
/// points with the recorded bound as a line. Infinite bounds simply have no
/// visible bound curve.
pub fn gap_figure(records: &[TrialRecord], title: &str) -> Chart {
    let mut by_n: std::collections::BTreeMap<usize, (f64, f64)> = std::collections::BTreeMap::new();
    for r in records {
        let e = by_n.entry(r.n).or_insert((f64::NEG_INFINITY, r.bound));
        e.0 = e.0.max(r.delta);
        e.1 = r.bound;
    }
    let deltas: Vec<(f64, f64)> = by_n.iter().map(|(&n, &(d, _))| (n as f64, d)).collect();
    let bounds: Vec<(f64, f64)> = by_n.iter().map(|(&n, &(_, b))| (n as f64, b)).collect();
    // cap the scatter at ~5000 marks with a deterministic stride so large
    // sweeps stay viewable and small on disk
    let stride = records.len().div_ceil(5000).max(1);
    let all_points: Vec<(f64, f64)> = records
        .iter()
        .step_by(stride)
        .map(|r| (r.n as f64, r.delta))
        .collect();

    Chart::new(title, "context size n", "gap (nats)", true, true)
        .with_series("trials", all_points, DrawStyle::Points)
        .with_series("max per n", deltas, DrawStyle::Line)
        .with_series("bound", bounds, DrawStyle::Line)
}

/// Ratio-to-bound panel: `max delta / bound` per `n`, log x, linear y.
pub fn ratio_figure(records: &[TrialRecord], title: &str) -> Chart {
    let curve: Vec<(f64, f64)> = ratio_to_bound_curve(records)
        .into_iter()
        .map(|(n, ratio)| (n as f64, ratio))
        .collect();
    let ones: Vec<(f64, f64)> = curve.iter().map(|&(n, _)| (n, 1.0)).collect();
    Chart::new(title, "context size n", "gap / bound", true, false)
        .with_series("ratio", curve, DrawStyle::Line)
        .with_series("1", ones, DrawStyle::Line)
}

/// Multi-sweep overlay panel (one line per named record set), log-log.
pub fn multi_gap_figure(named: &[(String, Vec<TrialRecord>)], title: &str) -> Chart {
    let mut chart = Chart::new(title, "context size n", "gap (nats)", true, true);
    for (label, records) in named {
        let mut by_n: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for r in records {
            let e = by_n.entry(r.n).or_insert(f64::NEG_INFINITY);
            *e = e.max(r.delta);
        }
        let pts = by_n.iter().map(|(&n, &d)| (n as f64, d)).collect();
        chart = chart.with_series(label, pts, DrawStyle::Line);
    }
    chart
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records() -> Vec<TrialRecord> {
        (2..=50)
            .map(|n| TrialRecord {
                n,
                trial_index: 0,
                delta: 2.0 / ((n as f64 + 1.0) * (n as f64 + 1.0)),
                bound: 2.0 / ((n as f64 + 1.0) * (n as f64 + 1.0)),
                seed_used: 1,
            })
            .collect()
    }

    #[test]
    fn renders_well_formed_svg() {
        let svg = gap_figure(&records(), "gap vs n").render_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("gap vs n"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let a = ratio_figure(&records(), "ratio").render_svg();
        let b = ratio_figure(&records(), "ratio").render_svg();
        assert_eq!(a, b);
    }

    #[test]
    fn infinite_bounds_are_dropped_not_rendered() {
        let mut rs = records();
        for r in &mut rs {
            r.bound = f64::INFINITY;
        }
        let svg = gap_figure(&rs, "gap").render_svg();
        assert!(!svg.contains("inf"));
    }

    #[test]
    fn escapes_markup_in_labels() {
        let chart = Chart::new("a < b & c", "x", "y", false, false).with_series(
            "s",
            vec![(0.0, 0.0), (1.0, 1.0)],
            DrawStyle::Line,
        );
        let svg = chart.render_svg();
        assert!(svg.contains("a &lt; b &amp; c"));
    }

    #[test]
    fn log_ticks_cover_decades() {
        let t = ticks(0.001, 100.0, true);
        let labels: Vec<&str> = t.iter().map(|(_, l)| l.as_str()).collect();
        assert!(labels.contains(&"1e-2"));
        assert!(labels.contains(&"1e2"));
    }
}
