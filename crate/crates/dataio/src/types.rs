use std::collections::BTreeMap;

use crate::error::DataError;

/// The three diagnosis classes with their on-disk codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Normal = 1,
    Chf = 2,
    Pneumonia = 3,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Normal, ClassLabel::Chf, ClassLabel::Pneumonia];

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Zero-based class index used for logits and one-vs-rest metrics.
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_code(code: u8) -> Result<ClassLabel, DataError> {
        match code {
            1 => Ok(ClassLabel::Normal),
            2 => Ok(ClassLabel::Chf),
            3 => Ok(ClassLabel::Pneumonia),
            other => Err(DataError::Argument(format!(
                "label {other} outside {{1,2,3}}"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Normal => "Normal",
            ClassLabel::Chf => "CHF",
            ClassLabel::Pneumonia => "Pneumonia",
        }
    }
}

/// One gaze dwell event in normalized image coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixationEvent {
    pub t_start_ms: u32,
    pub duration_ms: u32,
    pub x: f64,
    pub y: f64,
}

impl FixationEvent {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.duration_ms == 0 {
            return Err(DataError::Argument("fixation duration must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.x) || !(0.0..=1.0).contains(&self.y) {
            return Err(DataError::Argument(format!(
                "fixation coordinates ({}, {}) outside [0,1]",
                self.x, self.y
            )));
        }
        Ok(())
    }
}

/// 8-bit grayscale grid, row-major. Used for images, gaze heatmaps, and
/// rounded attention maps alike; values are always within [0, 255] by
/// construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Heatmap {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl Heatmap {
    pub fn new(width: usize, height: usize) -> Heatmap {
        Heatmap {
            width,
            height,
            values: vec![0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<u8>) -> Result<Heatmap, DataError> {
        if values.len() != width * height {
            return Err(DataError::Dimension(format!(
                "{}x{} grid needs {} values, got {}",
                width,
                height,
                width * height,
                values.len()
            )));
        }
        Ok(Heatmap {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.values[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.values[y * self.width + x] = v;
    }

    pub fn max_value(&self) -> u8 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// Row-major copy as f64, unscaled.
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// Axis-aligned annotation in pixel coordinates, half-open on the max
/// edges: a pixel (x, y) is inside when x_min <= x < x_max and
/// y_min <= y < y_max.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl BoundingBox {
    pub fn validate(&self, width: usize, height: usize) -> Result<(), DataError> {
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(DataError::Argument(format!(
                "degenerate bounding box {:?}",
                self
            )));
        }
        if self.x_max > width || self.y_max > height {
            return Err(DataError::Argument(format!(
                "bounding box {:?} exceeds {}x{} bounds",
                self, width, height
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x_min && x < self.x_max && y >= self.y_min && y < self.y_max
    }
}

/// The three report sections carried by every study.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub indication: String,
    pub findings: String,
    pub impression: String,
}

impl Report {
    /// Whole-report text in section order.
    pub fn full_text(&self) -> String {
        format!("{} {} {}", self.indication, self.findings, self.impression)
    }
}

/// One case: image, sectioned report, fixation log, and the rendered
/// temporal/static gaze heatmaps.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRecord {
    pub study_id: String,
    pub patient_id: String,
    pub label: ClassLabel,
    pub image: Heatmap,
    pub report: Report,
    pub fixations: Vec<FixationEvent>,
    pub temporal: Vec<Heatmap>,
    pub static_map: Heatmap,
}

/// Patient-pure fold assignment: every study of a patient shares a fold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    assignment: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub(crate) fn new(k: usize, assignment: BTreeMap<String, usize>) -> FoldAssignment {
        FoldAssignment { k, assignment }
    }

    pub fn fold_of(&self, study_id: &str) -> Option<usize> {
        self.assignment.get(study_id).copied()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.assignment.iter().map(|(id, &f)| (id.as_str(), f))
    }
}
