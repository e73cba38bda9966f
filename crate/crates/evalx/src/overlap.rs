//! The attention-overlap explainability metric: thresholded attention
//! mass inside the annotated boxes over thresholded mass everywhere.

use std::collections::BTreeMap;
use std::path::Path;

use dataio::{BoundingBox, Heatmap};

use crate::error::EvalError;

/// Intensity cutoff: pixels must exceed this value to contribute.
pub const OVERLAP_CUTOFF: u8 = 100;

#[inline]
fn phi(value: u8) -> u64 {
    if value > OVERLAP_CUTOFF {
        value as u64
    } else {
        0
    }
}

/// Sum of phi over the union of box interiors divided by the sum over the
/// whole map. Overlapping boxes count each pixel once; if no pixel clears
/// the cutoff the metric is 0. Integer accumulation, one final division.
pub fn attention_overlap(map: &Heatmap, boxes: &[BoundingBox]) -> Result<f64, EvalError> {
    let (w, h) = (map.width(), map.height());
    for b in boxes {
        b.validate(w, h)
            .map_err(|e| EvalError::Argument(e.to_string()))?;
    }
    let mut inside = vec![false; w * h];
    for b in boxes {
        for y in b.y_min..b.y_max {
            for x in b.x_min..b.x_max {
                inside[y * w + x] = true;
            }
        }
    }
    let mut numerator: u64 = 0;
    let mut denominator: u64 = 0;
    for (i, &v) in map.values().iter().enumerate() {
        let contribution = phi(v);
        denominator += contribution;
        if inside[i] {
            numerator += contribution;
        }
    }
    if denominator == 0 {
        return Ok(0.0);
    }
    Ok(numerator as f64 / denominator as f64)
}

/// Converts a [0,1] attention grid to the 0..255 integer scale the metric
/// is defined on.
pub fn attention_to_heatmap(values: &[f64], width: usize, height: usize) -> Heatmap {
    let bytes = values
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    Heatmap::from_values(width, height, bytes).expect("attention grid dimensions")
}

/// Scores previously saved attention maps (`<study_id>.pgm` files in
/// `maps_dir`) against bounding boxes. Returns per-study overlaps sorted
/// by study id.
pub fn score_saved_maps(
    maps_dir: &Path,
    boxes: &BTreeMap<String, Vec<BoundingBox>>,
) -> Result<Vec<(String, f64)>, EvalError> {
    let mut out = Vec::new();
    for (study_id, study_boxes) in boxes {
        let path = maps_dir.join(format!("{study_id}.pgm"));
        if !path.exists() {
            continue;
        }
        let map = dataio::pgm::read_pgm(&path)?;
        out.push((study_id.clone(), attention_overlap(&map, study_boxes)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_2x2(values: [u8; 4]) -> Heatmap {
        Heatmap::from_values(2, 2, values.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_200_over_470() {
        let map = map_2x2([200, 50, 150, 120]);
        let boxes = [BoundingBox {
            x_min: 0,
            y_min: 0,
            x_max: 1,
            y_max: 1,
        }];
        let overlap = attention_overlap(&map, &boxes).unwrap();
        assert_eq!(overlap, 200.0 / 470.0);
    }

    #[test]
    fn full_coverage_of_bright_pixels_is_one() {
        let map = map_2x2([101, 255, 180, 102]);
        let boxes = [BoundingBox {
            x_min: 0,
            y_min: 0,
            x_max: 2,
            y_max: 2,
        }];
        assert_eq!(attention_overlap(&map, &boxes).unwrap(), 1.0);
    }

    #[test]
    fn all_pixels_at_or_below_cutoff_give_zero() {
        let map = map_2x2([100, 99, 0, 42]);
        let boxes = [BoundingBox {
            x_min: 0,
            y_min: 0,
            x_max: 2,
            y_max: 2,
        }];
        assert_eq!(attention_overlap(&map, &boxes).unwrap(), 0.0);
    }

    #[test]
    fn overlapping_boxes_count_pixels_once() {
        let map = map_2x2([200, 200, 200, 200]);
        let twice = [
            BoundingBox {
                x_min: 0,
                y_min: 0,
                x_max: 1,
                y_max: 2,
            },
            BoundingBox {
                x_min: 0,
                y_min: 0,
                x_max: 1,
                y_max: 2,
            },
        ];
        let overlap = attention_overlap(&map, &twice).unwrap();
        assert_eq!(overlap, 0.5);
    }

    #[test]
    fn out_of_bounds_box_is_rejected() {
        let map = map_2x2([0; 4]);
        let boxes = [BoundingBox {
            x_min: 0,
            y_min: 0,
            x_max: 3,
            y_max: 1,
        }];
        assert!(matches!(
            attention_overlap(&map, &boxes),
            Err(EvalError::Argument(_))
        ));
    }
}
