//! Dependency-free SVG line charts for the command-line reports.
//!
//! Deliberately minimal: fixed canvas, linear axes with round-ish ticks,
//! one polyline per series, and a small legend. The output is plain XML
//! text, deterministic for identical inputs.

/// One plotted series; `xs` and `ys` must have equal length.
pub struct Series<'a> {
    pub label: &'a str,
    /// Any SVG color string, e.g. "red" or "#1f77b4".
    pub color: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;
const TICKS: usize = 5;

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tight numeric label: fixed notation with trailing zeros trimmed for
/// ordinary magnitudes, scientific for extreme ones.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs();
    if !(1e-4..1e7).contains(&mag) {
        return format!("{v:.3e}");
    }
    let s = format!("{v:.6}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.len() <= 9 {
        trimmed.to_string()
    } else {
        format!("{v:.3e}")
    }
}

fn finite_bounds(series: &[Series], pick_x: bool) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        let vals = if pick_x { s.xs } else { s.ys };
        for &v in vals {
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// Renders a complete SVG document with axes, tick labels, a title, and one
/// polyline per series. Non-finite points are dropped from the polylines.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x_lo, x_hi) = finite_bounds(series, true);
    let (y_lo, y_hi) = finite_bounds(series, false);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w,
            MARGIN_TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h,
        )
    };

    let mut out = String::with_capacity(4096);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"17\">{}</text>\n",
        WIDTH / 2.0,
        escape_xml(title)
    ));

    // Axes.
    let (ax0, ay0) = (MARGIN_LEFT, MARGIN_TOP + plot_h);
    out.push_str(&format!(
        "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{}\" y2=\"{ay0}\" stroke=\"black\"/>\n",
        MARGIN_LEFT + plot_w
    ));
    out.push_str(&format!(
        "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{ax0}\" y2=\"{MARGIN_TOP}\" stroke=\"black\"/>\n"
    ));
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let xp = MARGIN_LEFT + f * plot_w;
        let yp = MARGIN_TOP + (1.0 - f) * plot_h;
        out.push_str(&format!(
            "<line x1=\"{xp}\" y1=\"{ay0}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>\n",
            ay0 + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"12\">{}</text>\n",
            ay0 + 20.0,
            tick_label(xv)
        ));
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{ax0}\" y2=\"{yp}\" stroke=\"black\"/>\n",
            ax0 - 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"12\">{}</text>\n",
            ax0 - 9.0,
            yp + 4.0,
            tick_label(yv)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape_xml(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape_xml(y_label)
    ));

    for s in series {
        let mut points = String::new();
        for (&x, &y) in s.xs.iter().zip(s.ys) {
            if x.is_finite() && y.is_finite() {
                let (px, py) = to_px(x, y);
                points.push_str(&format!("{px:.2},{py:.2} "));
            }
        }
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            escape_xml(s.color),
            points.trim_end()
        ));
    }

    // Legend in the top-right corner of the plot area.
    for (i, s) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w - 150.0;
        out.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" \
             stroke-width=\"2\"/>\n",
            lx + 26.0,
            escape_xml(s.color)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            lx + 32.0,
            ly + 4.0,
            escape_xml(s.label)
        ));
    }
    out.push_str("</svg>\n");
    out
}
