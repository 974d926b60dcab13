//! Minimal SVG line plots: axes, ticks, linear or log y scale, polylines.

use std::fmt::Write;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        Self {
            label: label.into(),
            points,
            color,
            dashed: false,
        }
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
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const W: f64 = 480.0;
const H: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 15.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Compact number label.
pub fn label(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let a = x.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        let s = format!("{x:.2e}");
        let (m, e) = s.split_once('e').unwrap();
        let m = m.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{e}")
    }
}

/// About five round tick values covering [lo, hi].
pub fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 {
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

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(panel: &Panel) -> Option<(f64, f64, f64, f64)> {
    let pts = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite() && (!panel.log_y || *y > 0.0));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        let y = if panel.log_y { y.log10() } else { y };
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return None;
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if panel.log_y {
        y0 = y0.floor();
        y1 = y1.ceil().max(y0 + 1.0);
    } else {
        if y0 > 0.0 && y0 < 0.5 * y1 {
            y0 = 0.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
    }
    Some((x0, x1, y0, y1))
}

fn draw_panel(out: &mut String, panel: &Panel, ox: f64) {
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let _ = writeln!(
        out,
        r#"<g transform="translate({ox},0)"><text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&panel.title)
    );
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let Some((x0, x1, y0, y1)) = bounds(panel) else {
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">no data</text></g>"#, LEFT + pw / 2.0, TOP + ph / 2.0);
        return;
    };
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    for t in linear_ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            label(t)
        );
    }
    let yticks: Vec<(f64, String)> = if panel.log_y {
        let step = ((y1 - y0) / 6.0).ceil().max(1.0) as i64;
        (y0 as i64..=y1 as i64).step_by(step as usize).map(|d| (d as f64, format!("1e{d}"))).collect()
    } else {
        linear_ticks(y0, y1).into_iter().map(|t| (t, label(t))).collect()
    };
    for (t, text) in yticks {
        let y = sy(t);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end" font-size="11">{text}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
        LEFT + pw / 2.0,
        H - 10.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(16,{}) rotate(-90)" text-anchor="middle" font-size="12">{}</text>"#,
        TOP + ph / 2.0,
        escape(&panel.y_label)
    );

    for (k, s) in panel.series.iter().enumerate() {
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!panel.log_y || *y > 0.0))
            .map(|&(x, y)| {
                let y = if panel.log_y { y.log10() } else { y };
                format!("{:.2},{:.2}", sx(x), sy(y))
            })
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="5,3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            s.color,
            coords.join(" ")
        );
        let ly = TOP + 14.0 + 14.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}"{dash}/><text x="{}" y="{}" font-size="11">{}</text>"#,
            LEFT + 8.0,
            LEFT + 28.0,
            s.color,
            LEFT + 32.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</g>\n");
}

/// Panels laid out side by side.
pub fn render(panels: &[Panel]) -> String {
    let width = W * panels.len().max(1) as f64;
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{H}" viewBox="0 0 {width} {H}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>
"#
    );
    for (i, p) in panels.iter().enumerate() {
        draw_panel(&mut out, p, W * i as f64);
    }
    out.push_str("</svg>\n");
    out
}

/// The same series on a linear and a log y axis.
pub fn lin_log(title: &str, x_label: &str, y_label: &str, series: Vec<Series>) -> String {
    let panel = |log_y| Panel {
        title: format!("{title} ({})", if log_y { "log" } else { "linear" }),
        x_label: x_label.into(),
        y_label: y_label.into(),
        log_y,
        series: series.clone(),
    };
    render(&[panel(false), panel(true)])
}

/// Horizontal bars of |value − reference|/tolerance per row, with the pass
/// line at 1. Bars are capped at 2.
pub fn score_bars(title: &str, rows: &[(String, f64, bool)]) -> String {
    let row_h = 18.0;
    let left = 300.0;
    let bar_w = 300.0;
    let height = TOP + row_h * rows.len() as f64 + 30.0;
    let width = left + bar_w + 40.0;
    let mut out = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>
"#,
        width / 2.0,
        escape(title)
    );
    for (i, (name, score, pass)) in rows.iter().enumerate() {
        let y = TOP + row_h * i as f64;
        let len = if score.is_finite() { score.clamp(0.0, 2.0) } else { 2.0 } / 2.0 * bar_w;
        let color = if *pass { "#2a9d46" } else { "#c0392b" };
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" font-size="11">{}</text><rect x="{left}" y="{}" width="{len:.2}" height="{}" fill="{color}"/>"#,
            left - 6.0,
            y + 12.0,
            escape(name),
            y + 3.0,
            row_h - 6.0
        );
    }
    let x1 = left + bar_w / 2.0;
    let _ = writeln!(
        out,
        r#"<line x1="{x1}" y1="{TOP}" x2="{x1}" y2="{}" stroke="black" stroke-dasharray="4,3"/><text x="{x1}" y="{}" text-anchor="middle" font-size="11">tolerance</text>"#,
        height - 25.0,
        height - 10.0
    );
    out.push_str("</svg>\n");
    out
}
