//! Study schema, gaze heatmap rendering, synthetic dataset generation,
//! and patient-grouped folds.
//!
//! On-disk formats: PGM images/heatmaps (P5 emitted, P2 accepted), CSV
//! fixation logs and manifests, sectioned UTF-8 reports.

pub mod error;
pub mod files;
pub mod folds;
pub mod generate;
pub mod heatmap;
pub mod load;
pub mod pgm;
pub mod types;

pub use error::DataError;
pub use files::load_bounding_boxes;
pub use folds::grouped_kfold;
pub use generate::{
    generate_synthetic_dataset, DatasetManifest, GenerateConfig, PLANTED_TOKEN_PAIRS,
};
pub use heatmap::{
    amalgamate_heatmaps, render_fixation_field, render_fixation_heatmap, resize_grid,
    resize_heatmap,
};
pub use load::load_dataset;
pub use types::{
    BoundingBox, ClassLabel, FixationEvent, FoldAssignment, Heatmap, Report, StudyRecord,
};
