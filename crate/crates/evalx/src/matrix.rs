//! The standard experiment matrix: nine classification experiments and
//! six explainability rows (three feature combinations, each without and
//! with the gaze heatmap as secondary ground truth). The unet trained
//! with the heatmap loss serves both as a classification experiment and
//! as the "with" half of the x-ray explainability row.

use models::ArchitectureId;
use numeric_core::rng::derive_seed;

use crate::cv::ExperimentSpec;
use crate::prep::TextSelection;

#[derive(Clone, Debug)]
pub struct MatrixEntry {
    pub spec: ExperimentSpec,
    /// Counted among the nine classification experiments.
    pub classification: bool,
    /// Training epochs for this family, sized for desk-scale runtimes.
    pub epochs: usize,
}

const TEXT_EPOCHS: usize = 30;
const CNN_EPOCHS: usize = 5;
const TEMPORAL_EPOCHS: usize = 4;
const UNET_EPOCHS: usize = 5;

/// Default training epochs per architecture family, sized so the full
/// matrix stays a desk-scale run.
pub fn family_epochs(arch: ArchitectureId) -> usize {
    match arch {
        ArchitectureId::Text => TEXT_EPOCHS,
        ArchitectureId::HmapTemporal | ArchitectureId::TemporalImgFusion => TEMPORAL_EPOCHS,
        ArchitectureId::GazeSupervisedUnet => UNET_EPOCHS,
        _ => CNN_EPOCHS,
    }
}

fn entry(
    id: &str,
    arch: ArchitectureId,
    text: Option<TextSelection>,
    heatmap_loss: bool,
    classification: bool,
    epochs: usize,
) -> MatrixEntry {
    MatrixEntry {
        spec: ExperimentSpec {
            id: id.to_string(),
            arch,
            text,
            heatmap_loss,
        },
        classification,
        epochs,
    }
}

/// All fourteen runs, in their canonical (seed-defining) order.
pub fn standard_matrix() -> Vec<MatrixEntry> {
    use ArchitectureId::*;
    use TextSelection::*;
    vec![
        entry("img", Img, None, false, true, CNN_EPOCHS),
        entry("hmap-static", HmapStatic, None, false, true, CNN_EPOCHS),
        entry("hmap-temporal", HmapTemporal, None, false, true, TEMPORAL_EPOCHS),
        entry("text-indication", Text, Some(Indication), false, true, TEXT_EPOCHS),
        entry("text-full-report", Text, Some(FullReport), false, true, TEXT_EPOCHS),
        entry(
            "fusion-full-report-img",
            TextImgFusion,
            Some(FullReport),
            false,
            true,
            CNN_EPOCHS,
        ),
        entry(
            "fusion-indication-img",
            TextImgFusion,
            Some(Indication),
            false,
            true,
            CNN_EPOCHS,
        ),
        entry(
            "unet-static-gt",
            GazeSupervisedUnet,
            None,
            true,
            true,
            UNET_EPOCHS,
        ),
        entry(
            "temporal-img-fusion",
            TemporalImgFusion,
            None,
            false,
            true,
            TEMPORAL_EPOCHS,
        ),
        entry("attn-img", GazeSupervisedUnet, None, false, false, UNET_EPOCHS),
        entry(
            "attn-indication-img",
            GazeSupervisedUnet,
            Some(Indication),
            false,
            false,
            UNET_EPOCHS,
        ),
        entry(
            "attn-indication-img-gt",
            GazeSupervisedUnet,
            Some(Indication),
            true,
            false,
            UNET_EPOCHS,
        ),
        entry(
            "attn-full-report-img",
            GazeSupervisedUnet,
            Some(FullReport),
            false,
            false,
            UNET_EPOCHS,
        ),
        entry(
            "attn-full-report-img-gt",
            GazeSupervisedUnet,
            Some(FullReport),
            true,
            false,
            UNET_EPOCHS,
        ),
    ]
}

/// The Table-12-style summary rows: feature combination with the ids of
/// its without/with-heatmap-loss runs.
#[derive(Clone, Copy, Debug)]
pub struct SummaryPair {
    pub input_features: &'static str,
    pub without_id: &'static str,
    pub with_id: &'static str,
}

pub const OVERLAP_SUMMARY_PAIRS: [SummaryPair; 3] = [
    SummaryPair {
        input_features: "x-ray",
        without_id: "attn-img",
        with_id: "unet-static-gt",
    },
    SummaryPair {
        input_features: "x-ray+exam-indication",
        without_id: "attn-indication-img",
        with_id: "attn-indication-img-gt",
    },
    SummaryPair {
        input_features: "x-ray+full-report",
        without_id: "attn-full-report-img",
        with_id: "attn-full-report-img-gt",
    },
];

/// Stable per-experiment seed derived from the run seed and the entry's
/// canonical position, so concurrent execution order cannot matter.
pub fn experiment_seed(base: u64, index: usize) -> u64 {
    derive_seed(base, 0xE0_0000 + index as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_classification_and_six_explainability() {
        let matrix = standard_matrix();
        assert_eq!(matrix.len(), 14);
        let classification = matrix.iter().filter(|e| e.classification).count();
        assert_eq!(classification, 9);
        let attention = matrix
            .iter()
            .filter(|e| e.spec.arch.emits_attention())
            .count();
        assert_eq!(attention, 6);
        // ids unique
        let mut ids: Vec<&str> = matrix.iter().map(|e| e.spec.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 14);
        // every summary pair references existing ids
        for pair in OVERLAP_SUMMARY_PAIRS {
            assert!(ids.contains(&pair.without_id));
            assert!(ids.contains(&pair.with_id));
        }
    }
}
