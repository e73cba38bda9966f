//! Evaluation and experiment orchestration: one-vs-rest AUC, the
//! attention-overlap metric, patient-grouped cross-validation over any
//! experiment configuration, and table emission.

pub mod auc;
pub mod cv;
pub mod error;
pub mod matrix;
pub mod overlap;
pub mod prep;
pub mod report;

pub use auc::{binary_auc, ovr_auc_report, OvrAuc};
pub use cv::{
    run_cv_experiment, AucReport, CvSettings, ExperimentResult, ExperimentSpec, OverlapReport,
};
pub use error::EvalError;
pub use matrix::{experiment_seed, standard_matrix, MatrixEntry, SummaryPair, OVERLAP_SUMMARY_PAIRS};
pub use overlap::{attention_overlap, attention_to_heatmap, score_saved_maps, OVERLAP_CUTOFF};
pub use prep::{prepare_inputs, TextSelection};
pub use report::{
    improvement_percent, write_attention_composite_svg, write_auc_csv, write_overlap_csv,
    write_overlap_summary_csv, OverlapSummaryRow,
};
