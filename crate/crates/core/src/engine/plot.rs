use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::log::{LogError, TrajectoryLog};
use crate::model::WIRE_COUNT;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 110.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;
const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Tick positions covering `[lo, hi]` at a 1-2-5 step.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Self-contained SVG line chart.
pub fn line_chart(title: &str, y_label: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y0 -= 0.5;
        y1 += 0.5;
    } else {
        let pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;
    }
    let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{MARGIN_TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            MARGIN_TOP + ph,
            MARGIN_TOP + ph + 16.0,
            label(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_LEFT + pw,
            MARGIN_LEFT - 6.0,
            y + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">t [s]</text>"#,
        MARGIN_LEFT + pw / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        MARGIN_TOP + ph / 2.0,
        MARGIN_TOP + ph / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let stride = ser.points.len().div_ceil(MAX_POINTS).max(1);
        let mut pts = String::new();
        for (i, &(x, y)) in ser.points.iter().enumerate() {
            if i % stride == 0 || i + 1 == ser.points.len() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
            }
        }
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
        if series.len() > 1 {
            let ly = MARGIN_TOP + 14.0 + 16.0 * k as f64;
            let lx = MARGIN_LEFT + pw + 10.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                lx + 18.0,
                lx + 24.0,
                ly + 4.0,
                escape(&ser.label)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn scalar(log: &TrajectoryLog, f: impl Fn(&super::LogRow) -> f64) -> Vec<Series> {
    vec![Series { label: String::new(), points: log.rows.iter().map(|r| (r.t, f(r))).collect() }]
}

fn per_wire(log: &TrajectoryLog, f: impl Fn(&super::LogRow) -> &[Option<f64>; WIRE_COUNT]) -> Vec<Series> {
    (0..WIRE_COUNT)
        .filter(|&i| log.rows.first().is_some_and(|r| f(r)[i].is_some()))
        .map(|i| Series {
            label: format!("wire {i}"),
            points: log.rows.iter().filter_map(|r| f(r)[i].map(|v| (r.t, v))).collect(),
        })
        .collect()
}

/// Writes one chart per logged quantity into `dir`; returns the file paths.
pub fn emit_plots(log: &TrajectoryLog, dir: &Path) -> Result<Vec<PathBuf>, LogError> {
    if log.rows.is_empty() {
        return Err(LogError::Empty);
    }
    let charts: Vec<(&str, String, &str, Vec<Series>)> = vec![
        ("z", format!("{}: height", log.scenario), "z [m]", scalar(log, |r| r.position[2])),
        ("x", format!("{}: forward position", log.scenario), "x [m]", scalar(log, |r| r.position[0])),
        ("y", format!("{}: lateral position", log.scenario), "y [m]", scalar(log, |r| r.position[1])),
        ("roll", format!("{}: roll", log.scenario), "roll [rad]", scalar(log, |r| r.rpy[0])),
        ("pitch", format!("{}: pitch", log.scenario), "pitch [rad]", scalar(log, |r| r.rpy[1])),
        ("yaw", format!("{}: yaw", log.scenario), "yaw [rad]", scalar(log, |r| r.rpy[2])),
        ("fref", format!("{}: target wire tension", log.scenario), "f_ref [N]", per_wire(log, |r| &r.f_ref)),
        ("lengths", format!("{}: wire length", log.scenario), "l [m]", per_wire(log, |r| &r.lengths)),
    ];
    let mut paths = Vec::new();
    for (stem, title, y_label, series) in charts {
        let path = dir.join(format!("{stem}.svg"));
        std::fs::write(&path, line_chart(&title, y_label, &series))?;
        paths.push(path);
    }
    Ok(paths)
}
