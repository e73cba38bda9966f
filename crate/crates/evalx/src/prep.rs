//! Conversion of loaded study records into model input tensors.

use dataio::{Heatmap, StudyRecord};
use models::{ModelConfig, StudyInputs};
use numeric_core::NdArray;
use textembed::{sentence_embedding, EmbeddingModel};

use crate::error::EvalError;

/// Which report text feeds the text branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TextSelection {
    Indication,
    FullReport,
}

impl TextSelection {
    pub fn name(self) -> &'static str {
        match self {
            TextSelection::Indication => "indication",
            TextSelection::FullReport => "full-report",
        }
    }

    pub fn from_name(name: &str) -> Result<TextSelection, EvalError> {
        match name {
            "indication" => Ok(TextSelection::Indication),
            "full-report" => Ok(TextSelection::FullReport),
            other => Err(EvalError::Argument(format!(
                "unknown text section {other:?}; expected indication or full-report"
            ))),
        }
    }

    pub fn extract(self, record: &StudyRecord) -> String {
        match self {
            TextSelection::Indication => record.report.indication.clone(),
            TextSelection::FullReport => record.report.full_text(),
        }
    }
}

fn grid_tensor(map: &Heatmap) -> NdArray {
    NdArray::from_vec(
        &[1, map.height(), map.width()],
        map.values().iter().map(|&v| v as f64 / 255.0).collect(),
    )
    .expect("grid dimensions")
}

/// Builds the tensors an experiment needs. Only the modalities the
/// configuration consumes are materialized.
pub fn prepare_inputs(
    records: &[StudyRecord],
    cfg: &ModelConfig,
    text: Option<TextSelection>,
    embeddings: Option<&EmbeddingModel>,
) -> Result<Vec<StudyInputs>, EvalError> {
    if cfg.uses_text() {
        if text.is_none() {
            return Err(EvalError::Argument(format!(
                "architecture {} needs a text section",
                cfg.arch.name()
            )));
        }
        if embeddings.is_none() {
            return Err(EvalError::Argument(
                "text experiments need a trained embedding model".into(),
            ));
        }
    }
    let mut out = Vec::with_capacity(records.len());
    for record in records {
        let mut inputs = StudyInputs::empty(record.study_id.clone(), record.label.index());
        if cfg.uses_image() {
            inputs.image = Some(grid_tensor(&record.image));
        }
        if cfg.uses_static_map() {
            inputs.static_map = Some(grid_tensor(&record.static_map));
        }
        if cfg.uses_frames() {
            inputs.frames = Some(record.temporal.iter().map(grid_tensor).collect());
        }
        if cfg.uses_text() {
            let selection = text.expect("checked above");
            let model = embeddings.expect("checked above");
            let emb = sentence_embedding(&selection.extract(record), model);
            if emb.vector.len() != cfg.text_dim {
                return Err(EvalError::Argument(format!(
                    "embedding dimension {} does not match configured text_dim {}",
                    emb.vector.len(),
                    cfg.text_dim
                )));
            }
            inputs.text = Some(NdArray::from_vec(&[cfg.text_dim], emb.vector).expect("dim checked"));
        }
        if cfg.heatmap_loss {
            let m = &record.static_map;
            inputs.heatmap_target = Some(
                NdArray::from_vec(
                    &[m.height(), m.width()],
                    m.values().iter().map(|&v| v as f64 / 255.0).collect(),
                )
                .expect("grid dimensions"),
            );
        }
        out.push(inputs);
    }
    Ok(out)
}
