use numeric_core::NdArray;

/// Prepared per-study tensors. Images and heatmaps arrive scaled to
/// [0, 1] as [1, S, S]; text is the summed sentence embedding.
#[derive(Clone, Debug)]
pub struct StudyInputs {
    pub study_id: String,
    pub image: Option<NdArray>,
    pub static_map: Option<NdArray>,
    pub frames: Option<Vec<NdArray>>,
    pub text: Option<NdArray>,
    /// Zero-based class index (label code minus one).
    pub label_index: usize,
    /// Static gaze heatmap scaled to [0, 1] as [S, S]; the regression
    /// target of the gaze-supervised decoder.
    pub heatmap_target: Option<NdArray>,
}

impl StudyInputs {
    pub fn empty(study_id: impl Into<String>, label_index: usize) -> StudyInputs {
        StudyInputs {
            study_id: study_id.into(),
            image: None,
            static_map: None,
            frames: None,
            text: None,
            label_index,
            heatmap_target: None,
        }
    }
}
