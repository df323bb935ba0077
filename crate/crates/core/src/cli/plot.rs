//! Minimal self-contained SVG line plots.

use std::fmt::Write as _;

use crate::analysis::PhaseScanResult;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::fock::FockIndex;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;

/// Traces whose population never exceeds this are left out of the plot.
const TRACE_FLOOR: f64 = 1e-3;

const PALETTE: [&str; 8] = [
    "#1f5fbf", "#c8102e", "#2a9d3f", "#e08a00", "#7b3fa0", "#00897b", "#8d6e63", "#546e7a",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Population versus time (ns) with the interaction window shaded.
    Populations,
    /// N00N and single-magnon phase versus gap (MHz).
    PhaseVsDetuning,
}

impl PlotKind {
    fn name(self) -> &'static str {
        match self {
            Self::Populations => "populations",
            Self::PhaseVsDetuning => "phase-vs-detuning",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PlotSource<'a> {
    Trajectory {
        trajectory: &'a Trajectory,
        window: Option<(f64, f64)>,
    },
    PhaseScan(&'a PhaseScanResult),
}

impl PlotSource<'_> {
    fn kind(&self) -> PlotKind {
        match self {
            Self::Trajectory { .. } => PlotKind::Populations,
            Self::PhaseScan(_) => PlotKind::PhaseVsDetuning,
        }
    }
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

pub fn emit_plot(source: &PlotSource<'_>, kind: PlotKind) -> Result<String> {
    if source.kind() != kind {
        return Err(Error::PlotKindMismatch {
            requested: kind.name(),
            actual: source.kind().name(),
        });
    }
    match *source {
        PlotSource::Trajectory { trajectory, window } => populations_plot(trajectory, window),
        PlotSource::PhaseScan(scan) => phase_plot(scan),
    }
}

fn populations_plot(trajectory: &Trajectory, window: Option<(f64, f64)>) -> Result<String> {
    if trajectory.len() < 2 {
        return Err(Error::EmptyPlot("trajectory has fewer than two samples"));
    }
    let times_ns: Vec<f64> = trajectory.times.iter().map(|t| t * 1e9).collect();
    let states: &[FockIndex] = trajectory.basis().states();
    let series: Vec<Series> = states
        .iter()
        .enumerate()
        .filter(|&(j, _)| trajectory.populations.iter().any(|p| p[j] > TRACE_FLOOR))
        .map(|(j, idx)| Series {
            label: format!("|{}{}\u{27e9}", idx.m1, idx.m2),
            points: times_ns
                .iter()
                .zip(&trajectory.populations)
                .map(|(&t, p)| (t, p[j]))
                .collect(),
        })
        .collect();
    let x_range = (times_ns[0], *times_ns.last().unwrap());
    let shade = window.map(|(a, b)| (a * 1e9, b * 1e9));
    Ok(render(
        &series,
        x_range,
        (0.0, 1.0),
        "time (ns)",
        "population",
        shade,
    ))
}

fn phase_plot(scan: &PhaseScanResult) -> Result<String> {
    if scan.is_empty() {
        return Err(Error::EmptyPlot("phase scan has no admissible points"));
    }
    let mhz: Vec<f64> = scan
        .detunings
        .iter()
        .map(|d| d / (2.0 * std::f64::consts::PI) / 1e6)
        .collect();
    let series = vec![
        Series {
            label: "N00N phase \u{03a6}".into(),
            points: mhz
                .iter()
                .copied()
                .zip(scan.phases.iter().copied())
                .collect(),
        },
        Series {
            label: "single phase \u{03c6}".into(),
            points: mhz
                .iter()
                .copied()
                .zip(scan.single_phases.iter().copied())
                .collect(),
        },
    ];
    let ys = scan.phases.iter().chain(&scan.single_phases);
    let lo = ys.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.copied().fold(f64::NEG_INFINITY, f64::max);
    let x_range = if mhz.len() == 1 {
        (mhz[0] - 1.0, mhz[0] + 1.0)
    } else {
        (mhz[0], *mhz.last().unwrap())
    };
    Ok(render(
        &series,
        x_range,
        (lo.min(-0.1), hi.max(0.1)),
        "\u{0394}\u{03c9}/2\u{03c0} (MHz)",
        "phase (rad)",
        None,
    ))
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(x: f64) -> String {
    let s = format!("{:.3}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn render(
    series: &[Series],
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    x_label: &str,
    y_label: &str,
    shade: Option<(f64, f64)>,
) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some((a, b)) = shade {
        let (a, b) = (a.max(x0), b.min(x1));
        let _ = writeln!(
            svg,
            r##"<rect class="interaction-window" x="{:.2}" y="{TOP}" width="{:.2}" height="{plot_h}" fill="#bdbdbd" fill-opacity="0.5"/>"##,
            sx(a),
            sx(b) - sx(a)
        );
    }
    for t in ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0,
            fmt_tick(t)
        );
    }
    for t in ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{y_label}</text>"#,
        TOP + plot_h / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 20.0 * i as f64;
        let lx = LEFT + plot_w + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}
