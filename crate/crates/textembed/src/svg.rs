//! SVG scatter plots of 2D projections, colored by class code 1/2/3.

use std::fs;
use std::path::Path;

use crate::error::TextError;

const COLORS: [(u8, &str); 3] = [(1, "#1f77b4"), (2, "#ff7f0e"), (3, "#2ca02c")];

/// Writes a class-colored scatter with a 1/2/3 legend. Points whose class
/// code is unknown are drawn gray.
pub fn write_scatter_svg(
    path: &Path,
    points: &[(f64, f64)],
    class_codes: &[u8],
    title: &str,
) -> Result<(), TextError> {
    if points.len() != class_codes.len() {
        return Err(TextError::Argument(format!(
            "{} points but {} class codes",
            points.len(),
            class_codes.len()
        )));
    }
    let (width, height, margin) = (640.0, 480.0, 48.0);
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    if points.is_empty() || !min_x.is_finite() {
        min_x = 0.0;
        max_x = 1.0;
        min_y = 0.0;
        max_y = 1.0;
    }
    let span_x = (max_x - min_x).max(1e-9);
    let span_y = (max_y - min_y).max(1e-9);
    let sx = |x: f64| margin + (x - min_x) / span_x * (width - 2.0 * margin);
    // SVG y axis grows downward; flip so larger components plot higher.
    let sy = |y: f64| height - margin - (y - min_y) / span_y * (height - 2.0 * margin);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        width / 2.0,
        title
    ));
    for (&(x, y), &code) in points.iter().zip(class_codes) {
        let color = COLORS
            .iter()
            .find(|(c, _)| *c == code)
            .map(|(_, hex)| *hex)
            .unwrap_or("#999999");
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.75\"/>\n",
            sx(x),
            sy(y),
            color
        ));
    }
    for (i, (code, color)) in COLORS.iter().enumerate() {
        let y = 40.0 + i as f64 * 20.0;
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{y:.2}\" r=\"5\" fill=\"{color}\"/>\n",
            width - margin - 40.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"13\">{code}</text>\n",
            width - margin - 28.0,
            y + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg).map_err(|e| TextError::io(path, e))
}
