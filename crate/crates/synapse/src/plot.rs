//! Self-contained SVG plots of traces and sweep tables.

use std::fmt::Write as _;

use skysyn_core::synapse::{CurrentCurve, SynapseTrace, WidthSweep};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PlotError {
    #[error("nothing to plot")]
    Empty,
}

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Canvas {
    svg: String,
    x: (f64, f64),
    y: (f64, f64),
    legend: usize,
}

/// "Nice" tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let d = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - d, hi + d)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Canvas {
    fn new(title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            LEFT + 0.5 * (W - LEFT - RIGHT),
            escape(title)
        );
        let mut c = Self { svg, x, y, legend: 0 };
        c.axes(xlabel, ylabel);
        c
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn axes(&mut self, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
        let _ = writeln!(
            self.svg,
            r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
        for t in ticks(self.x.0, self.x.1) {
            let p = self.px(t);
            let _ = writeln!(self.svg, r#"<line x1="{p:.2}" y1="{y1}" x2="{p:.2}" y2="{}" stroke="black"/>"#, y1 + 5.0);
            let _ =
                writeln!(self.svg, r#"<text x="{p:.2}" y="{}" text-anchor="middle">{}</text>"#, y1 + 18.0, fmt_tick(t));
        }
        for t in ticks(self.y.0, self.y.1) {
            let p = self.py(t);
            let _ = writeln!(self.svg, r#"<line x1="{}" y1="{p:.2}" x2="{x0}" y2="{p:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(
                self.svg,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 8.0,
                p + 4.0,
                fmt_tick(t)
            );
        }
        let _ = writeln!(
            self.svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            0.5 * (x0 + x1),
            H - 15.0,
            escape(xlabel)
        );
        let _ = writeln!(
            self.svg,
            r#"<text transform="translate(18 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
            0.5 * (y0 + y1),
            escape(ylabel)
        );
    }

    fn shade(&mut self, from: f64, to: f64) {
        let (a, b) = (self.px(from.max(self.x.0)), self.px(to.min(self.x.1)));
        if b > a {
            let _ = writeln!(
                self.svg,
                r##"<rect class="pulse" x="{a:.2}" y="{TOP}" width="{:.2}" height="{}" fill="#f5d76e" fill-opacity="0.35"/>"##,
                b - a,
                H - TOP - BOTTOM
            );
        }
    }

    fn line(&mut self, pts: &[(f64, f64)], color: &str, label: &str) {
        if pts.len() == 1 {
            self.markers(pts, color, label);
            return;
        }
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let _ = writeln!(
            self.svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        self.legend_entry(color, label);
    }

    fn markers(&mut self, pts: &[(f64, f64)], color: &str, label: &str) {
        for &(x, y) in pts {
            let _ = writeln!(
                self.svg,
                r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#,
                self.px(x),
                self.py(y)
            );
        }
        self.legend_entry(color, label);
    }

    fn legend_entry(&mut self, color: &str, label: &str) {
        let y = TOP + 10.0 + 18.0 * self.legend as f64;
        let x = W - RIGHT + 12.0;
        let _ = writeln!(self.svg, r#"<rect x="{x}" y="{}" width="14" height="4" fill="{color}"/>"#, y - 2.0);
        let _ = writeln!(self.svg, r#"<text x="{}" y="{}">{}</text>"#, x + 20.0, y + 4.0, escape(label));
        self.legend += 1;
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{:.4}", t);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Region-average m_z and the weight against time, with driven intervals
/// shaded.
pub fn trace_svg(trace: &SynapseTrace, title: &str) -> Result<String, PlotError> {
    if trace.samples.is_empty() {
        return Err(PlotError::Empty);
    }
    let t: Vec<f64> = trace.samples.iter().map(|s| s.report.time * 1e9).collect();
    let x = padded(t[0], t[t.len() - 1]);
    let mut c = Canvas::new(title, "time (ns)", "m_z, weight", x, (-1.05, 1.05));
    for p in &trace.pulses {
        c.shade(p.start * 1e9, p.end * 1e9);
    }
    let series = |f: fn(&skysyn_core::analysis::SkyrmionReport) -> f64| -> Vec<(f64, f64)> {
        trace.samples.iter().map(|s| (s.report.time * 1e9, f(&s.report))).collect()
    };
    c.line(&series(|r| r.mz_pre), COLORS[0], "mz_pre");
    c.line(&series(|r| r.mz_post), COLORS[1], "mz_post");
    c.line(&series(|r| r.weight), COLORS[2], "weight");
    Ok(c.finish())
}

/// Saturation count against width with the fitted line.
pub fn width_sweep_svg(sweep: &WidthSweep) -> Result<String, PlotError> {
    if sweep.rows.is_empty() {
        return Err(PlotError::Empty);
    }
    let pts: Vec<(f64, f64)> = sweep.rows.iter().map(|r| (r.width * 1e9, r.survivors as f64)).collect();
    let x = padded(range(pts.iter().map(|p| p.0)).0, range(pts.iter().map(|p| p.0)).1);
    let (ylo, yhi) = range(pts.iter().map(|p| p.1));
    let mut c =
        Canvas::new("Saturation count vs track width", "track width (nm)", "skyrmions", x, padded(0f64.min(ylo), yhi));
    c.markers(&pts, COLORS[0], "simulated");
    if let Some(f) = sweep.fit {
        let line = [(x.0, f.slope * x.0 + f.intercept), (x.1, f.slope * x.1 + f.intercept)];
        c.line(&line, COLORS[1], &format!("fit R²={:.3}", f.r_squared));
    }
    Ok(c.finish())
}

/// Postsynapse skyrmion count against time, one curve per density.
pub fn current_sweep_svg(curves: &[CurrentCurve]) -> Result<String, PlotError> {
    let all: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.n_post().map(|(t, n)| (t * 1e9, n as f64))).collect();
    if all.is_empty() {
        return Err(PlotError::Empty);
    }
    let (tlo, thi) = range(all.iter().map(|p| p.0));
    let (_, nhi) = range(all.iter().map(|p| p.1));
    let mut c =
        Canvas::new("Postsynapse population", "time (ns)", "n_post", padded(tlo, thi), padded(0.0, nhi.max(1.0)));
    if let Some(first) = curves.first() {
        let t0 = first.trace.initial().map_or(0.0, |r| r.time);
        for p in &first.trace.pulses {
            c.shade((p.start - t0) * 1e9, (p.end - t0) * 1e9);
        }
    }
    for (k, curve) in curves.iter().enumerate() {
        let pts: Vec<(f64, f64)> = curve.n_post().map(|(t, n)| (t * 1e9, n as f64)).collect();
        c.line(&pts, COLORS[k % COLORS.len()], &format!("{} MA/cm²", curve.current_density * 1e-10));
    }
    Ok(c.finish())
}
