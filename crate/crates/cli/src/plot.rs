//! Actual-vs-predicted scatter plots as self-contained SVG.
//!
//! One marker per point, a 45-degree ideal-prediction line spanning the data
//! range, and shared x/y scaling so the identity line is a true diagonal.
//! Output bytes are deterministic for identical input: coordinates are
//! formatted to two decimals and nothing time- or locale-dependent is
//! emitted.

use std::fmt::Write;

use anyhow::{bail, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Maps one data axis onto pixels.
struct Scale {
    lo: f64,
    hi: f64,
}

impl Scale {
    fn over(values: impl Iterator<Item = f64>) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let pad = if hi > lo {
            0.05 * (hi - lo)
        } else {
            lo.abs().max(1.0) * 0.1
        };
        Scale {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.lo) / (self.hi - self.lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.lo) / (self.hi - self.lo) * (HEIGHT - 2.0 * MARGIN)
    }
}

/// Renders `(actual, predicted)` points. Errors on an empty input.
pub fn scatter_svg(points: &[(f64, f64)]) -> Result<String> {
    if points.is_empty() {
        bail!("no prediction points to plot");
    }
    if points
        .iter()
        .any(|&(a, p)| !a.is_finite() || !p.is_finite())
    {
        bail!("non-finite prediction point");
    }

    // One shared scale keeps the identity line at 45 degrees.
    let scale = Scale::over(points.iter().flat_map(|&(a, p)| [a, p]));

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Axes.
    let _ = writeln!(
        svg,
        r#"  <line x1="{m:.2}" y1="{b:.2}" x2="{r:.2}" y2="{b:.2}" stroke="black" stroke-width="1"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    );
    let _ = writeln!(
        svg,
        r#"  <line x1="{m:.2}" y1="{t:.2}" x2="{m:.2}" y2="{b:.2}" stroke="black" stroke-width="1"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN
    );

    // Ideal-prediction diagonal across the padded data range.
    let _ = writeln!(
        svg,
        r##"  <line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#888888" stroke-width="1" stroke-dasharray="6 3" class="ideal"/>"##,
        x1 = scale.x(scale.lo),
        y1 = scale.y(scale.lo),
        x2 = scale.x(scale.hi),
        y2 = scale.y(scale.hi)
    );

    for &(actual, predicted) in points {
        let _ = writeln!(
            svg,
            r##"  <circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="#1f6fb2" class="point"/>"##,
            cx = scale.x(actual),
            cy = scale.y(predicted)
        );
    }

    // Range labels and axis titles.
    let _ = writeln!(
        svg,
        r#"  <text x="{x:.2}" y="{y:.2}" font-family="monospace" font-size="11">{lo:.2}</text>"#,
        x = MARGIN,
        y = HEIGHT - MARGIN + 16.0,
        lo = scale.lo
    );
    let _ = writeln!(
        svg,
        r#"  <text x="{x:.2}" y="{y:.2}" font-family="monospace" font-size="11" text-anchor="end">{hi:.2}</text>"#,
        x = WIDTH - MARGIN,
        y = HEIGHT - MARGIN + 16.0,
        hi = scale.hi
    );
    let _ = writeln!(
        svg,
        r#"  <text x="{x:.2}" y="{y:.2}" font-family="monospace" font-size="12" text-anchor="middle">actual weight (g)</text>"#,
        x = WIDTH / 2.0,
        y = HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"  <text x="{x:.2}" y="{y:.2}" font-family="monospace" font-size="12" text-anchor="middle" transform="rotate(-90 {x:.2} {y:.2})">predicted weight (g)</text>"#,
        x = 20.0,
        y = HEIGHT / 2.0
    );
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}
