//! Standalone SVG line charts. Output depends only on the data, so repeated
//! runs give identical files.

use std::fmt::Write as _;

use evsim_core::experiments::{AccelReport, TopSpeedReport};
use evsim_core::TraceRecord;

/// Longest polyline drawn per series; denser data is thinned evenly.
const MAX_POINTS: usize = 2000;
const WIDTH: f64 = 800.0;
const PANEL_HEIGHT: f64 = 280.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const PANEL_GAP: f64 = 60.0;
const COLORS: [&str; 4] = ["#d62728", "#1f77b4", "#2ca02c", "#7f7f7f"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Tracking,
    RangeSoc,
    Accel,
    SocDynamics,
    TopSpeed,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub panels: Vec<Panel>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("nothing to plot")]
pub struct EmptyPlot;

fn series(name: &str, points: Vec<(f64, f64)>) -> Series {
    Series {
        name: name.into(),
        points,
        dashed: false,
    }
}

fn reference_line(name: &str, y: f64, x0: f64, x1: f64) -> Series {
    Series {
        name: name.into(),
        points: vec![(x0, y), (x1, y)],
        dashed: true,
    }
}

fn panel(y_label: &str, series: Vec<Series>) -> Panel {
    Panel {
        x_label: "time (s)".into(),
        y_label: y_label.into(),
        series,
    }
}

fn column(trace: &[TraceRecord], f: impl Fn(&TraceRecord) -> f64) -> Vec<(f64, f64)> {
    trace.iter().map(|r| (r.t, f(r))).collect()
}

fn x_span(points: &[(f64, f64)]) -> (f64, f64) {
    (
        points.first().map_or(0.0, |p| p.0),
        points.last().map_or(1.0, |p| p.0),
    )
}

/// Build the figure for a trace-based plot.
pub fn trace_figure(kind: PlotKind, trace: &[TraceRecord]) -> Result<Figure, EmptyPlot> {
    if trace.is_empty() {
        return Err(EmptyPlot);
    }
    let speed = || {
        panel(
            "speed (km/h)",
            vec![
                series("target", column(trace, |r| r.v_target)),
                series("vehicle", column(trace, |r| r.v)),
            ],
        )
    };
    let soc = || {
        panel(
            "state of charge (-)",
            vec![series("SoC", column(trace, |r| r.soc))],
        )
    };
    let (title, panels) = match kind {
        PlotKind::Tracking => ("Speed tracking", vec![speed()]),
        PlotKind::RangeSoc => (
            "Distance and state of charge",
            vec![
                panel(
                    "distance (km)",
                    vec![series("distance", column(trace, |r| r.distance))],
                ),
                soc(),
            ],
        ),
        PlotKind::SocDynamics => ("State of charge over the cycle", vec![speed(), soc()]),
        PlotKind::Accel | PlotKind::TopSpeed => (
            "Full-throttle speed",
            vec![panel(
                "speed (km/h)",
                vec![series("vehicle", column(trace, |r| r.v))],
            )],
        ),
    };
    Ok(Figure {
        title: title.into(),
        panels,
    })
}

pub fn accel_figure(report: &AccelReport) -> Result<Figure, EmptyPlot> {
    if report.speed_trajectory.len() < 2 {
        return Err(EmptyPlot);
    }
    let (x0, x1) = x_span(&report.speed_trajectory);
    Ok(Figure {
        title: format!(
            "Acceleration to {} km/h: {:.2} s",
            report.target_kmh, report.time_to_target_s
        ),
        panels: vec![panel(
            "speed (km/h)",
            vec![
                series("vehicle", report.speed_trajectory.clone()),
                reference_line("target", report.target_kmh, x0, x1),
            ],
        )],
    })
}

pub fn top_speed_figure(
    report: &TopSpeedReport,
    trace: &[TraceRecord],
) -> Result<Figure, EmptyPlot> {
    if trace.is_empty() {
        return Err(EmptyPlot);
    }
    let points = column(trace, |r| r.v);
    let (x0, x1) = x_span(&points);
    Ok(Figure {
        title: format!("Top speed: {:.1} km/h", report.vmax_kmh),
        panels: vec![panel(
            "speed (km/h)",
            vec![
                series("vehicle", points),
                reference_line("force balance", report.oracle_vmax_kmh, x0, x1),
            ],
        )],
    })
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = (points.len() + MAX_POINTS - 1) / MAX_POINTS;
    let mut out: Vec<_> = points.iter().step_by(stride).copied().collect();
    if out.last() != points.last() {
        out.push(*points.last().expect("non-empty"));
    }
    out
}

/// Round tick spacing giving about `target` intervals over `[lo, hi]`.
fn tick_step(lo: f64, hi: f64, target: f64) -> f64 {
    let raw = (hi - lo) / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 1e-12 {
            0.05 * lo.abs()
        } else {
            1.0
        };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s.trim_start_matches(['-', '0', '.']).is_empty() {
        s[1..].to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn render_svg(fig: &Figure) -> Result<String, EmptyPlot> {
    if fig.panels.is_empty()
        || fig
            .panels
            .iter()
            .all(|p| p.series.iter().all(|s| s.points.is_empty()))
    {
        return Err(EmptyPlot);
    }
    let height = MARGIN_TOP + fig.panels.len() as f64 * (PANEL_HEIGHT + PANEL_GAP);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&fig.title)
    );
    for (i, p) in fig.panels.iter().enumerate() {
        let top = MARGIN_TOP + i as f64 * (PANEL_HEIGHT + PANEL_GAP);
        render_panel(&mut svg, p, top);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn render_panel(svg: &mut String, p: &Panel, top: f64) {
    let all = || p.series.iter().flat_map(|s| s.points.iter());
    let (x_lo, x_hi) = bounds(all().map(|q| q.0));
    let (y_lo, y_hi) = bounds(all().map(|q| q.1));
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let bottom = top + PANEL_HEIGHT;
    let sx = |x: f64| left + (x - x_lo) / (x_hi - x_lo) * (right - left);
    let sy = |y: f64| bottom - (y - y_lo) / (y_hi - y_lo) * PANEL_HEIGHT;

    let _ = writeln!(
        svg,
        r##"<rect x="{left}" y="{top}" width="{}" height="{PANEL_HEIGHT}" fill="none" stroke="#333"/>"##,
        right - left
    );
    for (axis, lo, hi) in [('x', x_lo, x_hi), ('y', y_lo, y_hi)] {
        let step = tick_step(lo, hi, 6.0);
        let mut k = (lo / step).ceil();
        while k * step <= hi + 1e-9 * step {
            let v = k * step;
            let text = label(v, step);
            if axis == 'x' {
                let x = sx(v);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="#333"/><text x="{x:.2}" y="{}" text-anchor="middle">{text}</text>"##,
                    bottom + 5.0,
                    bottom + 18.0
                );
            } else {
                let y = sy(v);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end">{text}</text>"##,
                    left - 5.0,
                    left - 8.0,
                    y + 4.0
                );
            }
            k += 1.0;
        }
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        bottom + 36.0,
        escape(&p.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        top + PANEL_HEIGHT / 2.0,
        escape(&p.y_label)
    );

    for (j, s) in p.series.iter().enumerate() {
        let color = COLORS[j % COLORS.len()];
        let mut path = String::new();
        for (x, y) in thin(&s.points) {
            let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let dash = if s.dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            path.trim_end()
        );
        let ly = top + 16.0 + 16.0 * j as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
            right - 130.0,
            right - 110.0,
            right - 104.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
}
