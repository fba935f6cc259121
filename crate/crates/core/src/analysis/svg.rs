use std::fmt::Write as _;
use std::path::Path;

use super::trace::{write_atomically, Trace};
use crate::error::{Error, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Static SVG 1.1 line plot: one polyline per series, dashed where flagged,
/// vertical guides at the markers and a legend built from the labels.
pub fn to_svg_string(trace: &Trace, y_label: &str) -> Result<String> {
    if trace.series.is_empty() {
        return Err(Error::NoSeries);
    }
    trace.validate()?;
    let (x0, x1) = range(trace.times.iter().copied());
    let (y0, y1) = if trace.x_label == "gt" {
        (0.0, 1.0)
    } else {
        range(trace.series.iter().flat_map(|s| s.values.iter().copied()))
    };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.3e}</text>
<text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.3}</text>"#,
            sx(fx),
            TOP + ph + 18.0,
            LEFT - 6.0,
            sy(fy) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>
<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&trace.x_label),
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for &m in trace.markers.iter().filter(|m| (x0..=x1).contains(*m)) {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{TOP}" x2="{0:.2}" y2="{1:.2}" stroke="#999999" stroke-width="1"/>"##,
            sx(m),
            TOP + ph
        );
    }
    for (k, s) in trace.series.iter().enumerate() {
        let colour = if s.dashed { "black" } else { PALETTE[k % PALETTE.len()] };
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let points: Vec<String> = trace
            .times
            .iter()
            .zip(&s.values)
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="1.5"{dash}/>
<text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_svg(trace: &Trace, y_label: &str, path: &Path) -> Result<()> {
    write_atomically(path, &to_svg_string(trace, y_label)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_every_series_and_dashes_derived_ones() {
        let mut t = Trace::new("gt", vec![0.0, 0.5, 1.0]);
        for l in ["P1", "P2", "P3", "P_ph"] {
            t.push_series(l, vec![0.0, 0.25, 0.0], false).unwrap();
        }
        t.push_series("W", vec![0.0, 0.75, 1.0], true).unwrap();
        t.markers.push(0.5);
        let svg = to_svg_string(&t, "probability").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 5);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert!(svg.contains(">probability<") && svg.contains(">gt<") && svg.contains(">P_ph<"));
        assert!(!svg.contains("<script"));
    }

    #[test]
    fn rejects_empty_and_escapes_labels() {
        assert!(matches!(to_svg_string(&Trace::new("gt", vec![0.0]), "p"), Err(Error::NoSeries)));
        let mut t = Trace::new("gamma_over_g", vec![0.0, 1.0]);
        t.push_series("a<b", vec![3.0, 3.0], false).unwrap();
        assert!(to_svg_string(&t, "fidelity").unwrap().contains("a&lt;b"));
    }
}
