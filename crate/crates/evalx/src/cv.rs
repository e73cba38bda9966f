//! Patient-grouped cross-validation over one experiment configuration.

use std::collections::{BTreeMap, BTreeSet};

use dataio::{grouped_kfold, BoundingBox, ClassLabel, Heatmap, StudyRecord};
use models::{predict, train_model, ArchitectureId, ModelConfig};
use numeric_core::rng::derive_seed;
use textembed::EmbeddingModel;

use crate::auc::{ovr_auc_report, OvrAuc};
use crate::error::EvalError;
use crate::overlap::{attention_overlap, attention_to_heatmap};
use crate::prep::{prepare_inputs, TextSelection};

const SALT_FOLD: u64 = 0xF01D;
const SALT_MODEL: u64 = 0x3027;

/// One experiment: an architecture, its input modalities, and whether the
/// gaze heatmap supervises the decoder.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub id: String,
    pub arch: ArchitectureId,
    pub text: Option<TextSelection>,
    pub heatmap_loss: bool,
}

impl ExperimentSpec {
    /// Applies this experiment's switches onto a base model template.
    pub fn configure(&self, base: &ModelConfig, seed: u64) -> ModelConfig {
        let mut cfg = base.clone();
        cfg.arch = self.arch;
        cfg.heatmap_loss = self.heatmap_loss;
        cfg.unet_text =
            self.arch == ArchitectureId::GazeSupervisedUnet && self.text.is_some();
        cfg.seed = seed;
        cfg
    }
}

#[derive(Clone, Debug)]
pub struct CvSettings {
    pub k: usize,
    pub seed: u64,
    /// Template for sizes, widths, epochs, batch, and optimizer; the
    /// architecture, flags, and seeds come from the experiment.
    pub base: ModelConfig,
    /// When set, each fold's trained parameters are written here as
    /// `fold_<i>.gmdl`.
    pub save_params_dir: Option<std::path::PathBuf>,
}

/// Per-fold and averaged one-vs-rest AUCs.
#[derive(Clone, Debug)]
pub struct AucReport {
    pub per_fold: Vec<OvrAuc>,
    pub average: OvrAuc,
}

impl AucReport {
    fn from_folds(per_fold: Vec<OvrAuc>) -> AucReport {
        let n = per_fold.len() as f64;
        let mut sums = [0.0; 4];
        for fold in &per_fold {
            sums[0] += fold.normal;
            sums[1] += fold.chf;
            sums[2] += fold.pneumonia;
            sums[3] += fold.macro_avg;
        }
        AucReport {
            per_fold,
            average: OvrAuc {
                normal: sums[0] / n,
                chf: sums[1] / n,
                pneumonia: sums[2] / n,
                macro_avg: sums[3] / n,
            },
        }
    }
}

/// Attention overlap of every annotated held-out study, with summary
/// statistics.
#[derive(Clone, Debug)]
pub struct OverlapReport {
    pub per_study: Vec<(String, f64)>,
    pub mean: f64,
    pub median: f64,
}

impl OverlapReport {
    pub fn from_values(mut per_study: Vec<(String, f64)>) -> OverlapReport {
        per_study.sort_by(|a, b| a.0.cmp(&b.0));
        let n = per_study.len();
        let mean = if n == 0 {
            0.0
        } else {
            per_study.iter().map(|(_, v)| v).sum::<f64>() / n as f64
        };
        let median = if n == 0 {
            0.0
        } else {
            let mut values: Vec<f64> = per_study.iter().map(|(_, v)| *v).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if n % 2 == 1 {
                values[n / 2]
            } else {
                (values[n / 2 - 1] + values[n / 2]) / 2.0
            }
        };
        OverlapReport {
            per_study,
            mean,
            median,
        }
    }
}

pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub auc: AucReport,
    pub overlap: Option<OverlapReport>,
    /// Attention maps of annotated held-out studies, on the 0..255 scale.
    pub attention_maps: Vec<(String, Heatmap)>,
    /// Per-fold training loss traces.
    pub fold_train_loss: Vec<Vec<f64>>,
}

/// Runs grouped k-fold cross-validation: trains on k-1 folds, evaluates
/// AUC on the held-out fold, and scores attention maps of annotated
/// held-out studies for decoder architectures.
pub fn run_cv_experiment(
    spec: &ExperimentSpec,
    records: &[StudyRecord],
    boxes: &BTreeMap<String, Vec<BoundingBox>>,
    embeddings: Option<&EmbeddingModel>,
    settings: &CvSettings,
) -> Result<ExperimentResult, EvalError> {
    let folds = grouped_kfold(records, settings.k, derive_seed(settings.seed, SALT_FOLD))?;
    let probe_cfg = spec.configure(&settings.base, 0);
    let inputs = prepare_inputs(records, &probe_cfg, spec.text, embeddings)?;

    let mut per_fold = Vec::with_capacity(settings.k);
    let mut overlaps: Vec<(String, f64)> = Vec::new();
    let mut attention_maps: Vec<(String, Heatmap)> = Vec::new();
    let mut fold_train_loss = Vec::with_capacity(settings.k);

    for fold in 0..settings.k {
        let result: Result<OvrAuc, EvalError> = (|| {
            let mut train_idx = Vec::new();
            let mut eval_idx = Vec::new();
            for (i, record) in records.iter().enumerate() {
                let assigned = folds
                    .fold_of(&record.study_id)
                    .ok_or_else(|| EvalError::Argument("study missing from folds".into()))?;
                if assigned == fold {
                    eval_idx.push(i);
                } else {
                    train_idx.push(i);
                }
            }
            // no patient may straddle the train/eval split
            let eval_patients: BTreeSet<&str> = eval_idx
                .iter()
                .map(|&i| records[i].patient_id.as_str())
                .collect();
            if train_idx
                .iter()
                .any(|&i| eval_patients.contains(records[i].patient_id.as_str()))
            {
                return Err(EvalError::Argument(
                    "patient appears in both train and eval folds".into(),
                ));
            }

            let cfg = spec.configure(
                &settings.base,
                derive_seed(settings.seed, SALT_MODEL + fold as u64),
            );
            let train_set: Vec<models::StudyInputs> =
                train_idx.iter().map(|&i| inputs[i].clone()).collect();
            let trained = train_model(&cfg, &train_set, None)?;
            fold_train_loss.push(trained.train_loss.clone());
            if let Some(dir) = &settings.save_params_dir {
                std::fs::create_dir_all(dir).map_err(|e| EvalError::io(dir, e))?;
                models::save_params(
                    &dir.join(format!("fold_{fold}.gmdl")),
                    &models::snapshot(trained.net.as_ref()),
                )?;
            }

            let mut probs = Vec::with_capacity(eval_idx.len());
            let mut labels: Vec<ClassLabel> = Vec::with_capacity(eval_idx.len());
            for &i in &eval_idx {
                let (p, attention) = predict(trained.net.as_ref(), &inputs[i])?;
                probs.push([p[0], p[1], p[2]]);
                labels.push(records[i].label);
                if let Some(att) = attention {
                    let study_id = &records[i].study_id;
                    if let Some(study_boxes) = boxes.get(study_id) {
                        let shape = att.shape().to_vec();
                        let map = attention_to_heatmap(att.data(), shape[1], shape[0]);
                        overlaps.push((study_id.clone(), attention_overlap(&map, study_boxes)?));
                        attention_maps.push((study_id.clone(), map));
                    }
                }
            }
            ovr_auc_report(&probs, &labels)
        })();
        per_fold.push(result.map_err(|e| EvalError::in_fold(fold, e))?);
    }

    let overlap = if spec.arch.emits_attention() {
        Some(OverlapReport::from_values(overlaps))
    } else {
        None
    };
    attention_maps.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(ExperimentResult {
        spec: spec.clone(),
        auc: AucReport::from_folds(per_fold),
        overlap,
        attention_maps,
        fold_train_loss,
    })
}
