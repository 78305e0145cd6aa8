//! CSV and SVG emission. Every byte written here is a pure function of the
//! computed values: fixed float formatting, fixed ordering, LF newlines,
//! no timestamps. That is what makes rerun outputs byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use crate::AppError;

/// Scientific notation with ten fractional digits, the CSV number format.
pub fn num(x: f64) -> String {
    format!("{x:.10e}")
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), AppError> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)
        .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    /// Fixed y range; None auto-ranges with 5% padding.
    pub y_range: Option<(f64, f64)>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#e377c2",
];

const W: f64 = 840.0;
const H: f64 = 560.0;
const ML: f64 = 72.0;
const MR: f64 = 176.0;
const MT: f64 = 44.0;
const MB: f64 = 56.0;

fn tick_label(x: f64, log: bool) -> String {
    if log {
        format!("{x:.0e}")
    } else if x != 0.0 && (x.abs() < 1e-2 || x.abs() >= 1e4) {
        format!("{x:.1e}")
    } else {
        format!("{x:.3}")
    }
}

/// Self-contained SVG line plot. Axes are linear in y and linear or log10
/// in x; ticks sit on round values of the mapped coordinate.
pub fn line_plot(spec: &PlotSpec, series: &[Series]) -> String {
    let map_x = |x: f64| if spec.log_x { x.log10() } else { x };
    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| map_x(p.0)))
        .filter(|v| v.is_finite())
        .collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .filter(|v| v.is_finite())
        .collect();
    let (x_lo, x_hi) = bounds(&xs);
    let (y_lo, y_hi) = match spec.y_range {
        Some(r) => r,
        None => pad(bounds(&ys)),
    };

    let px = |x: f64| ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR);
    let py = |y: f64| H - MB - (y - y_lo) / (y_hi - y_lo) * (H - MT - MB);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        (ML + W - MR) / 2.0,
        esc(spec.title)
    );

    // Frame.
    let _ = write!(
        svg,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"#333\"/>\n",
        W - ML - MR,
        H - MT - MB
    );

    // Ticks and grid.
    for (t, label) in ticks(x_lo, x_hi, spec.log_x) {
        let x = px(t);
        let _ = write!(
            svg,
            "<line x1=\"{x:.1}\" y1=\"{MT}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>\n\
             <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{label}</text>\n",
            H - MB,
            H - MB + 18.0
        );
    }
    for (t, label) in ticks(y_lo, y_hi, false) {
        let y = py(t);
        let _ = write!(
            svg,
            "<line x1=\"{ML}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ddd\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{label}</text>\n",
            W - MR,
            ML - 6.0,
            y + 4.0
        );
    }

    // Axis labels.
    let _ = write!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        (ML + W - MR) / 2.0,
        H - 12.0,
        esc(spec.x_label),
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0,
        esc(spec.y_label)
    );

    // Series and legend.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for (j, &(x, y)) in s.points.iter().enumerate() {
            let (mx, my) = (map_x(x), y);
            if !(mx.is_finite() && my.is_finite()) {
                continue;
            }
            let _ = write!(
                path,
                "{}{:.2},{:.2}",
                if j == 0 { "M" } else { " L" },
                px(mx),
                py(my.clamp(y_lo, y_hi))
            );
        }
        let _ = write!(
            svg,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n"
        );
        let ly = MT + 14.0 + 18.0 * i as f64;
        let _ = write!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            W - MR + 10.0,
            W - MR + 34.0,
            W - MR + 40.0,
            ly + 4.0,
            esc(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_plot(path: &Path, spec: &PlotSpec, series: &[Series]) -> Result<(), AppError> {
    std::fs::write(path, line_plot(spec, series))
        .map_err(|e| AppError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn pad((lo, hi): (f64, f64)) -> (f64, f64) {
    let m = 0.05 * (hi - lo);
    (lo - m, hi + m)
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<(f64, String)> {
    if log {
        // Decade ticks on the log-mapped axis.
        let first = lo.ceil() as i64;
        let last = hi.floor() as i64;
        if first <= last && (last - first) <= 12 {
            return (first..=last)
                .map(|e| (e as f64, tick_label(10f64.powi(e as i32), true)))
                .collect();
        }
    }
    let n = 5usize;
    (0..=n)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / n as f64;
            let label = if log {
                tick_label(10f64.powf(t), true)
            } else {
                tick_label(t, false)
            };
            (t, label)
        })
        .collect()
}
