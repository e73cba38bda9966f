//! Dataset loading with full invariant validation. Any violation is
//! reported with the offending study id and path, mirroring how studies
//! with incomplete gaze data are excluded from use.

use std::path::Path;

use crate::error::DataError;
use crate::files::{read_fixations_csv, read_manifest, read_report};
use crate::heatmap::amalgamate_heatmaps;
use crate::pgm::read_pgm;
use crate::types::{ClassLabel, Heatmap, StudyRecord};

fn temporal_frames(dir: &Path, study_id: &str) -> Result<Vec<Heatmap>, DataError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|_| DataError::load(study_id, format!("missing temporal directory {}", dir.display())))?;
    let mut names: Vec<String> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| DataError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with("frame_") && name.ends_with(".pgm") {
            names.push(name);
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(DataError::load(
            study_id,
            format!("no temporal frames in {}", dir.display()),
        ));
    }
    names.iter().map(|n| read_pgm(&dir.join(n))).collect()
}

/// Loads every study referenced by the manifest, validating all record
/// invariants. Returns an error naming the first offending study.
pub fn load_dataset(manifest_path: &Path) -> Result<Vec<StudyRecord>, DataError> {
    let rows = read_manifest(manifest_path)?;
    let root = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let study_id = row.study_id.clone();
        let label = ClassLabel::from_code(row.label)
            .map_err(|e| DataError::load(&study_id, e.to_string()))?;

        let image = read_pgm(&root.join(&row.image))?;
        let report = read_report(&root.join(&row.report))?;
        let fixations = read_fixations_csv(&root.join(&row.fixations))?;
        for f in &fixations {
            f.validate()
                .map_err(|e| DataError::load(&study_id, e.to_string()))?;
        }
        if fixations.windows(2).any(|w| w[0].t_start_ms > w[1].t_start_ms) {
            return Err(DataError::load(
                &study_id,
                "fixations are not sorted by t_start_ms",
            ));
        }

        let temporal = temporal_frames(&root.join(&row.temporal_dir), &study_id)?;
        let static_map = read_pgm(&root.join(&row.static_heatmap))?;
        for (i, frame) in temporal.iter().enumerate() {
            if frame.width() != image.width() || frame.height() != image.height() {
                return Err(DataError::load(
                    &study_id,
                    format!(
                        "temporal frame {} is {}x{}, image is {}x{}",
                        i,
                        frame.width(),
                        frame.height(),
                        image.width(),
                        image.height()
                    ),
                ));
            }
        }
        if static_map.width() != image.width() || static_map.height() != image.height() {
            return Err(DataError::load(
                &study_id,
                "static heatmap dimensions do not match the image",
            ));
        }
        let recomputed = amalgamate_heatmaps(&temporal)
            .map_err(|e| DataError::load(&study_id, e.to_string()))?;
        if recomputed != static_map {
            return Err(DataError::load(
                &study_id,
                "static heatmap is not the amalgamation of the temporal frames",
            ));
        }

        out.push(StudyRecord {
            study_id,
            patient_id: row.patient_id,
            label,
            image,
            report,
            fixations,
            temporal,
            static_map,
        });
    }
    Ok(out)
}
