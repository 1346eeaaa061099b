//! Minimal self-contained SVG line plots: fixed 800×600 viewport, no
//! scripts, no external references. Supports linear and log₁₀ axes (the
//! published figures use log-scale error axes). All coordinates are
//! formatted with fixed precision so output bytes are deterministic.

use std::path::Path;

use crate::error::{CliError, Result};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 86.0;
const RIGHT: f64 = 770.0;
const TOP: f64 = 56.0;
const BOTTOM: f64 = 540.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
    "#bcbd22", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_log10: bool,
    pub y_log10: bool,
    /// Dashed horizontal reference lines with a short label, at data-space
    /// y positions.
    pub h_lines: Vec<(f64, String)>,
}

/// Applies the axis transform; log axes drop nonpositive values.
fn tf(v: f64, log: bool) -> Option<f64> {
    if !v.is_finite() {
        return None;
    }
    if log {
        if v > 0.0 {
            Some(v.log10())
        } else {
            None
        }
    } else {
        Some(v)
    }
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick label: exact for integers in plain range, exponent form outside it.
fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1e4 || a < 1e-3 {
        format!("{v:e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let unit = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    unit * mag
}

/// Tick positions in transformed space plus their data-space labels.
fn ticks(min: f64, max: f64, log: bool) -> Vec<(f64, String)> {
    if log && max - min >= 1.0 {
        // Integer decades, thinned to a handful of labels; both end decades
        // always get one so the axis range is readable.
        let lo = min.ceil() as i64;
        let hi = max.floor() as i64;
        let count = (hi - lo + 1).max(1);
        let stride = ((count + 5) / 6).max(1);
        let mut out: Vec<(f64, String)> = (lo..=hi)
            .step_by(stride as usize)
            .map(|e| (e as f64, format!("1e{e}")))
            .collect();
        if out.last().map(|(p, _)| *p as i64) != Some(hi) {
            out.push((hi as f64, format!("1e{hi}")));
        }
        return out;
    }
    let step = nice_step((max - min) / 4.0);
    let mut t = (min / step).ceil() * step;
    let mut out = Vec::new();
    while t <= max + step * 1e-9 {
        let label = if log {
            fmt_tick(10f64.powf(t))
        } else {
            fmt_tick(if t.abs() < step * 1e-9 { 0.0 } else { t })
        };
        out.push((t, label));
        t += step;
    }
    out
}

/// Renders a line plot of the given series. Fails if nothing is drawable
/// (e.g. all values nonpositive on a log axis).
pub fn line_plot(spec: &PlotSpec, series: &[Series]) -> Result<String> {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if let (Some(tx), Some(ty)) = (tf(x, spec.x_log10), tf(y, spec.y_log10)) {
                xs.push(tx);
                ys.push(ty);
            }
        }
    }
    for (y, _) in &spec.h_lines {
        if let Some(ty) = tf(*y, spec.y_log10) {
            ys.push(ty);
        }
    }
    if xs.is_empty() || ys.is_empty() {
        return Err(CliError::numerical(format!(
            "plot {:?} has no drawable points",
            spec.title
        )));
    }
    let (mut x_min, mut x_max) = minmax(&xs);
    let (mut y_min, mut y_max) = minmax(&ys);
    pad_range(&mut x_min, &mut x_max);
    pad_range(&mut y_min, &mut y_max);
    let sx = |t: f64| LEFT + (t - x_min) / (x_max - x_min) * (RIGHT - LEFT);
    let sy = |t: f64| BOTTOM - (t - y_min) / (y_max - y_min) * (BOTTOM - TOP);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"17\" fill=\"#111111\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        esc(&spec.title)
    ));

    // Axes frame.
    out.push_str(&format!(
        "<rect x=\"{LEFT:.2}\" y=\"{TOP:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        RIGHT - LEFT,
        BOTTOM - TOP
    ));

    for (t, label) in ticks(x_min, x_max, spec.x_log10) {
        let x = sx(t);
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{TOP:.2}\" x2=\"{x:.2}\" y2=\"{BOTTOM:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">{}</text>\n",
            BOTTOM + 18.0,
            esc(&label)
        ));
    }
    for (t, label) in ticks(y_min, y_max, spec.y_log10) {
        let y = sy(t);
        out.push_str(&format!(
            "<line x1=\"{LEFT:.2}\" y1=\"{y:.2}\" x2=\"{RIGHT:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">{}</text>\n",
            LEFT - 8.0,
            y + 4.0,
            esc(&label)
        ));
    }

    // Axis labels.
    out.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#111111\">{}</text>\n",
        (LEFT + RIGHT) / 2.0,
        HEIGHT - 14.0,
        esc(&spec.x_label)
    ));
    out.push_str(&format!(
        "<text x=\"22\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" fill=\"#111111\" transform=\"rotate(-90 22 {:.2})\">{}</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0,
        esc(&spec.y_label)
    ));

    // Reference lines.
    for (y, label) in &spec.h_lines {
        if let Some(ty) = tf(*y, spec.y_log10) {
            let py = sy(ty);
            out.push_str(&format!(
                "<line x1=\"{LEFT:.2}\" y1=\"{py:.2}\" x2=\"{RIGHT:.2}\" y2=\"{py:.2}\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"6 4\"/>\n"
            ));
            out.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666666\">{}</text>\n",
                RIGHT - 4.0,
                py - 4.0,
                esc(label)
            ));
        }
    }

    // Series paths; log-dropped points split the path into segments.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in &s.points {
            match (tf(x, spec.x_log10), tf(y, spec.y_log10)) {
                (Some(tx), Some(ty)) => {
                    let cmd = if pen_down { 'L' } else { 'M' };
                    d.push_str(&format!("{cmd}{:.2},{:.2} ", sx(tx), sy(ty)));
                    pen_down = true;
                }
                _ => pen_down = false,
            }
        }
        if !d.is_empty() {
            out.push_str(&format!(
                "<path d=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
                d.trim_end()
            ));
        }
    }

    // Legend, top-right inside the frame.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let y = TOP + 18.0 + 18.0 * i as f64;
        out.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{color}\" stroke-width=\"2.5\"/>\n",
            RIGHT - 150.0,
            RIGHT - 122.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#111111\">{}</text>\n",
            RIGHT - 116.0,
            y + 4.0,
            esc(&s.name)
        ));
    }

    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_plot(path: &Path, spec: &PlotSpec, series: &[Series]) -> Result<()> {
    let content = line_plot(spec, series)?;
    std::fs::write(path, content)
        .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn minmax(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn pad_range(lo: &mut f64, hi: &mut f64) {
    if *hi - *lo < 1e-12 * lo.abs().max(1.0) {
        let pad = lo.abs().max(1.0) * 0.5;
        *lo -= pad;
        *hi += pad;
    } else {
        let pad = (*hi - *lo) * 0.04;
        *lo -= pad;
        *hi += pad;
    }
}
