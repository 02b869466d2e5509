//! Static SVG time plots: positions, velocities and inputs in three stacked panels,
//! with phase boundaries drawn as vertical dashed rules.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::simulator::{Sample, Trajectory};

const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 220.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 90.0;
const MARGIN_TOP: f64 = 30.0;
const PANEL_GAP: f64 = 50.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

struct Series {
    name: &'static str,
    value: fn(&Sample) -> f64,
}

struct Panel {
    title: &'static str,
    series: Vec<Series>,
}

fn panels() -> Vec<Panel> {
    vec![
        Panel {
            title: "positions",
            series: vec![
                Series { name: "z1", value: |s| s.state.0[0] },
                Series { name: "z2", value: |s| s.state.0[1] },
                Series { name: "z3", value: |s| s.state.0[2] },
            ],
        },
        Panel {
            title: "velocities",
            series: vec![
                Series { name: "z4", value: |s| s.state.0[3] },
                Series { name: "z5", value: |s| s.state.0[4] },
                Series { name: "z6", value: |s| s.state.0[5] },
            ],
        },
        Panel {
            title: "inputs",
            series: vec![Series { name: "u1", value: |s| s.input.u1 }, Series { name: "u2", value: |s| s.input.u2 }],
        },
    ]
}

/// Padded `[lo, hi]` covering `values`; never degenerate.
fn value_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    if span <= 1e-12 * (1.0 + lo.abs().max(hi.abs())) {
        let pad = 0.5 * (1.0 + lo.abs());
        return (lo - pad, hi + pad);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Renders the trajectory as an SVG document.
pub fn render_svg(trajectory: &Trajectory) -> String {
    let panels = panels();
    let height = MARGIN_TOP + panels.len() as f64 * (PANEL_HEIGHT + PANEL_GAP);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let t_end = trajectory.samples.last().map_or(0.0, |s| s.t);
    let t_span = if t_end > 0.0 { t_end } else { 1.0 };
    let x_of = |t: f64| MARGIN_LEFT + plot_w * t / t_span;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (pi, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + pi as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let bottom = top + PANEL_HEIGHT;
        let (lo, hi) =
            value_range(panel.series.iter().flat_map(|s| trajectory.samples.iter().map(move |x| (s.value)(x))));
        let y_of = |v: f64| bottom - PANEL_HEIGHT * (v - lo) / (hi - lo);

        let _ = writeln!(svg, r#"<g class="panel" id="{}">"#, panel.title);
        let _ =
            writeln!(svg, r#"<text x="{MARGIN_LEFT}" y="{:.1}" font-weight="bold">{}</text>"#, top - 8.0, panel.title);
        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN_LEFT}" y="{top:.1}" width="{plot_w:.1}" height="{PANEL_HEIGHT}" fill="none" stroke="#444"/>"##
        );
        for k in 0..=4 {
            let v = lo + (hi - lo) * k as f64 / 4.0;
            let y = y_of(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{MARGIN_LEFT}" y2="{y:.1}" stroke="#444"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT - 4.0,
                MARGIN_LEFT - 6.0,
                y + 4.0,
                tick_label(v)
            );
        }
        if lo < 0.0 && hi > 0.0 {
            let y = y_of(0.0);
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN_LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#bbb"/>"##,
                MARGIN_LEFT + plot_w
            );
        }
        for k in 0..=4 {
            let t = t_span * k as f64 / 4.0;
            let x = x_of(t);
            let _ = writeln!(
                svg,
                r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                bottom + 16.0,
                tick_label(t)
            );
        }
        for &b in trajectory.phase_boundaries.iter().skip(1) {
            let Some(s) = trajectory.samples.get(b) else { continue };
            if s.t <= 0.0 || s.t >= t_end {
                continue;
            }
            let x = x_of(s.t);
            let _ = writeln!(
                svg,
                r##"<line class="phase-boundary" x1="{x:.2}" y1="{top:.1}" x2="{x:.2}" y2="{bottom:.1}" stroke="#888" stroke-dasharray="4 3"/>"##
            );
        }
        for (si, series) in panel.series.iter().enumerate() {
            let color = COLORS[si % COLORS.len()];
            if trajectory.samples.len() == 1 {
                let s = &trajectory.samples[0];
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    x_of(s.t),
                    y_of((series.value)(s))
                );
            } else {
                let mut points = String::with_capacity(trajectory.samples.len() * 16);
                for s in &trajectory.samples {
                    let _ = write!(points, "{:.2},{:.2} ", x_of(s.t), y_of((series.value)(s)));
                }
                let _ = writeln!(
                    svg,
                    r#"<polyline class="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    series.name,
                    points.trim_end()
                );
            }
            let ly = top + 14.0 + 16.0 * si as f64;
            let lx = MARGIN_LEFT + plot_w + 10.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
                ly - 4.0,
                lx + 18.0,
                ly - 4.0,
                lx + 22.0,
                series.name
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">t [s]</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        height - 8.0
    );
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

pub fn emit_plot(trajectory: &Trajectory, path: &Path) -> std::io::Result<()> {
    if trajectory.is_empty() {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty trajectory"));
    }
    fs::write(path, render_svg(trajectory))
}
