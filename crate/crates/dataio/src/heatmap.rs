//! Fixation-to-heatmap rendering, temporal amalgamation, and bilinear
//! resizing.

use crate::error::DataError;
use crate::types::{FixationEvent, Heatmap};

/// Pre-rescale Gaussian accumulation field. Each fixation deposits a
/// Gaussian centered at (x*width, y*height) whose total mass is
/// proportional to its duration, so the field is linear in duration.
pub fn render_fixation_field(
    fixations: &[FixationEvent],
    width: usize,
    height: usize,
    sigma: f64,
) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let mut field = vec![0.0f64; width * height];
    let two_sigma_sq = 2.0 * sigma * sigma;
    for fix in fixations {
        let cx = fix.x * width as f64;
        let cy = fix.y * height as f64;
        let mass = fix.duration_ms as f64;
        for py in 0..height {
            let dy = py as f64 - cy;
            let row = py * width;
            for px in 0..width {
                let dx = px as f64 - cx;
                field[row + px] += mass * (-(dx * dx + dy * dy) / two_sigma_sq).exp();
            }
        }
    }
    field
}

/// Linear rescale so the maximum maps to 255 (an all-zero field stays
/// zero), rounded to integers.
pub fn rescale_to_heatmap(field: &[f64], width: usize, height: usize) -> Heatmap {
    let max = field.iter().cloned().fold(0.0f64, f64::max);
    let values = if max > 0.0 {
        field
            .iter()
            .map(|&v| ((v / max) * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    } else {
        vec![0u8; width * height]
    };
    Heatmap::from_values(width, height, values).expect("field length matches grid")
}

/// Renders a fixation log into an intensity heatmap where brightness is
/// proportional to dwell time.
pub fn render_fixation_heatmap(
    fixations: &[FixationEvent],
    width: usize,
    height: usize,
    sigma: f64,
) -> Heatmap {
    let field = render_fixation_field(fixations, width, height, sigma);
    rescale_to_heatmap(&field, width, height)
}

/// Pixelwise sum of the temporal frames, rescaled so the maximum maps
/// to 255.
pub fn amalgamate_heatmaps(temporal: &[Heatmap]) -> Result<Heatmap, DataError> {
    let first = temporal
        .first()
        .ok_or_else(|| DataError::EmptyInput("amalgamate_heatmaps on no frames".into()))?;
    let (w, h) = (first.width(), first.height());
    let mut sum = vec![0.0f64; w * h];
    for frame in temporal {
        if frame.width() != w || frame.height() != h {
            return Err(DataError::Dimension(format!(
                "frame is {}x{}, expected {}x{}",
                frame.width(),
                frame.height(),
                w,
                h
            )));
        }
        for (acc, &v) in sum.iter_mut().zip(frame.values()) {
            *acc += v as f64;
        }
    }
    Ok(rescale_to_heatmap(&sum, w, h))
}

/// Bilinear resize with corner alignment; a length-1 target axis samples
/// the source center. Values stay inside the input range.
pub fn resize_grid(
    values: &[f64],
    width: usize,
    height: usize,
    new_w: usize,
    new_h: usize,
) -> Vec<f64> {
    assert!(width >= 1 && height >= 1 && new_w >= 1 && new_h >= 1);
    assert_eq!(values.len(), width * height);
    let src_x = |x: usize| -> f64 {
        if new_w == 1 {
            (width - 1) as f64 / 2.0
        } else {
            x as f64 * (width - 1) as f64 / (new_w - 1) as f64
        }
    };
    let src_y = |y: usize| -> f64 {
        if new_h == 1 {
            (height - 1) as f64 / 2.0
        } else {
            y as f64 * (height - 1) as f64 / (new_h - 1) as f64
        }
    };
    let mut out = vec![0.0; new_w * new_h];
    for y in 0..new_h {
        let sy = src_y(y);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(height - 1);
        let fy = sy - y0 as f64;
        for x in 0..new_w {
            let sx = src_x(x);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(width - 1);
            let fx = sx - x0 as f64;
            let top = values[y0 * width + x0] * (1.0 - fx) + values[y0 * width + x1] * fx;
            let bottom = values[y1 * width + x0] * (1.0 - fx) + values[y1 * width + x1] * fx;
            out[y * new_w + x] = top * (1.0 - fy) + bottom * fy;
        }
    }
    out
}

pub fn resize_heatmap(map: &Heatmap, new_w: usize, new_h: usize) -> Heatmap {
    let resized = resize_grid(&map.to_f64(), map.width(), map.height(), new_w, new_h);
    let values = resized
        .iter()
        .map(|&v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    Heatmap::from_values(new_w, new_h, values).expect("resize length matches grid")
}
