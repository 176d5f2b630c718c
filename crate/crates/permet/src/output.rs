//! CSV and SVG emission.
//!
//! Every output file starts with one comment line carrying the tool version,
//! the config hash and the seed. Floats are written at 17 significant digits.
//! Nothing volatile (timestamps, wall-clock times) goes into files, so a
//! fixed config and seed reproduce outputs byte for byte.

use crate::error::Result;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// Header comment line for every output file.
pub fn file_header(config_hash: u64, seed: u64) -> String {
    format!(
        "# permet {} config={:016x} seed={}",
        env!("CARGO_PKG_VERSION"),
        config_hash,
        seed
    )
}

/// Full round-trip float formatting (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// Writes a CSV file: header comment, column line, then rows.
pub fn write_csv(
    path: &Path,
    header: &str,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = String::new();
    let _ = writeln!(text, "{header}");
    let _ = writeln!(text, "{}", columns.join(","));
    for row in rows {
        let _ = writeln!(text, "{}", row.join(","));
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

const SVG_W: f64 = 640.0;
const SVG_H: f64 = 480.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal self-contained line chart: one polyline per series.
pub fn line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> Result<()> {
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    if pts.is_empty() {
        return Ok(());
    }
    let (mut x0, mut x1) = min_max(pts.iter().map(|p| p.0));
    let (mut y0, mut y1) = min_max(pts.iter().map(|p| p.1));
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (SVG_W - 2.0 * MARGIN);
    let sy = |y: f64| SVG_H - MARGIN - (y - y0) / (y1 - y0) * (SVG_H - 2.0 * MARGIN);

    let mut svg = svg_open(title);
    // Axes.
    let _ = writeln!(
        svg,
        "<line x1='{0}' y1='{1}' x2='{2}' y2='{1}' stroke='black'/>\
         <line x1='{0}' y1='{1}' x2='{0}' y2='{3}' stroke='black'/>",
        MARGIN,
        SVG_H - MARGIN,
        SVG_W - MARGIN,
        MARGIN
    );
    let _ = writeln!(
        svg,
        "<text x='{}' y='{}' font-size='12'>{}</text>",
        SVG_W / 2.0 - 20.0,
        SVG_H - 12.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        svg,
        "<text x='14' y='{}' font-size='12' transform='rotate(-90 14 {0})'>{}</text>",
        SVG_H / 2.0,
        xml_escape(y_label)
    );
    for (tick, frac) in [(x0, 0.0), (x1, 1.0)] {
        let _ = writeln!(
            svg,
            "<text x='{}' y='{}' font-size='10'>{tick:.4}</text>",
            MARGIN + frac * (SVG_W - 2.0 * MARGIN) - 12.0,
            SVG_H - MARGIN + 16.0
        );
    }
    for (tick, frac) in [(y0, 0.0), (y1, 1.0)] {
        let _ = writeln!(
            svg,
            "<text x='6' y='{}' font-size='10'>{tick:.4}</text>",
            SVG_H - MARGIN - frac * (SVG_H - 2.0 * MARGIN) + 4.0
        );
    }
    for (i, (label, data)) in series.iter().enumerate() {
        if data.is_empty() {
            continue;
        }
        let color = PALETTE[i % PALETTE.len()];
        let points: String = data
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            svg,
            "<polyline fill='none' stroke='{color}' stroke-width='1.5' points='{points}'/>"
        );
        let _ = writeln!(
            svg,
            "<text x='{}' y='{}' font-size='12' fill='{color}'>{}</text>",
            SVG_W - MARGIN - 120.0,
            MARGIN + 16.0 * (i as f64 + 1.0),
            xml_escape(label)
        );
    }
    svg.push_str("</svg>\n");
    write_text(path, &svg)
}

/// Polar plot of a direction-sampled norm, with the unit circle for scale.
pub fn polar_chart(path: &Path, title: &str, samples: &[(f64, f64)]) -> Result<()> {
    if samples.is_empty() {
        return Ok(());
    }
    let rmax = samples.iter().map(|s| s.1).fold(1.0f64, f64::max) * 1.1;
    let cx = SVG_W / 2.0;
    let cy = SVG_H / 2.0;
    let scale = (SVG_H / 2.0 - MARGIN) / rmax;
    let mut svg = svg_open(title);
    let _ = writeln!(
        svg,
        "<circle cx='{cx}' cy='{cy}' r='{}' fill='none' stroke='#bbbbbb' stroke-dasharray='4 3'/>",
        scale
    );
    let _ = writeln!(
        svg,
        "<text x='{}' y='{}' font-size='10' fill='#888888'>1.0</text>",
        cx + scale + 4.0,
        cy
    );
    let mut points: Vec<String> = samples
        .iter()
        .map(|&(theta, r)| {
            format!(
                "{:.2},{:.2}",
                cx + scale * r * theta.cos(),
                cy - scale * r * theta.sin()
            )
        })
        .collect();
    points.push(points[0].clone());
    let _ = writeln!(
        svg,
        "<polyline fill='none' stroke='{}' stroke-width='1.5' points='{}'/>",
        PALETTE[0],
        points.join(" ")
    );
    svg.push_str("</svg>\n");
    write_text(path, &svg)
}

fn svg_open(title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns='http://www.w3.org/2000/svg' width='{SVG_W}' height='{SVG_H}' viewBox='0 0 {SVG_W} {SVG_H}'>"
    );
    let _ = writeln!(
        svg,
        "<rect width='100%' height='100%' fill='white'/>\
         <text x='{}' y='24' font-size='14' text-anchor='middle'>{}</text>",
        SVG_W / 2.0,
        xml_escape(title)
    );
    svg
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, -2.5e-17, 1e300, 0.0] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "round trip failed for {s}");
        }
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            "# header",
            &["a", "b"],
            vec![vec!["1".into(), "2".into()]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# header\na,b\n1,2\n");
    }
}
