//! Mini-batch Adam training with seeded shuffling. The gaze-supervised
//! unet optimizes the weighted two-term objective when the heatmap flag
//! is on; every other configuration optimizes the classification loss.

use rand::seq::SliceRandom;

use numeric_core::graph::{reverse_sweep, Var};
use numeric_core::ops;
use numeric_core::rng::{derive_seed, seeded_rng};
use numeric_core::{adam_step, AdamState};

use crate::config::{combined_loss_node, ModelConfig};
use crate::error::ModelError;
use crate::inputs::StudyInputs;
use crate::nets::{build_net, Net};

const SALT_SHUFFLE: u64 = 0x5487_FF1E;

pub struct TrainedModel {
    pub net: Box<dyn Net>,
    /// Mean per-sample training loss per epoch.
    pub train_loss: Vec<f64>,
    /// Mean per-sample validation loss per epoch (empty without a
    /// validation set).
    pub valid_loss: Vec<f64>,
}

fn check_inputs(cfg: &ModelConfig, records: &[StudyInputs]) -> Result<(), ModelError> {
    for r in records {
        let missing: Option<&'static str> = if cfg.uses_image() && r.image.is_none() {
            Some("image")
        } else if cfg.uses_static_map() && r.static_map.is_none() {
            Some("static heatmap")
        } else if cfg.uses_frames() && r.frames.as_ref().map_or(true, |f| f.is_empty()) {
            Some("temporal frames")
        } else if cfg.uses_text() && r.text.is_none() {
            Some("sentence embedding")
        } else if cfg.heatmap_loss && r.heatmap_target.is_none() {
            Some("heatmap target")
        } else {
            None
        };
        if let Some(modality) = missing {
            return Err(ModelError::MissingModality {
                study_id: r.study_id.clone(),
                modality,
                arch: cfg.arch.name(),
            });
        }
    }
    Ok(())
}

/// Builds the per-sample loss node for the configured objective.
fn sample_loss(cfg: &ModelConfig, net: &dyn Net, record: &StudyInputs) -> Result<Var, ModelError> {
    let fwd = net.forward(record)?;
    let class_loss = ops::cross_entropy_loss(&fwd.probs, record.label_index)?;
    if cfg.heatmap_loss {
        let attention = fwd.attention.as_ref().expect("unet emits attention");
        let target = Var::leaf(
            record
                .heatmap_target
                .clone()
                .expect("validated heatmap target"),
        );
        let heatmap_loss = ops::mse_loss(attention, &target)?;
        Ok(combined_loss_node(&heatmap_loss, &class_loss)?)
    } else {
        Ok(class_loss)
    }
}

/// Trains a freshly built model and returns it with its loss traces.
pub fn train_model(
    cfg: &ModelConfig,
    train: &[StudyInputs],
    valid: Option<&[StudyInputs]>,
) -> Result<TrainedModel, ModelError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(ModelError::Config("training set is empty".into()));
    }
    check_inputs(cfg, train)?;
    if let Some(v) = valid {
        check_inputs(cfg, v)?;
    }

    let net = build_net(cfg)?;
    let params = net.params();
    let mut states: Vec<AdamState> = params
        .iter()
        .map(|(_, p)| AdamState::new(&p.value().shape().to_vec(), cfg.optimizer))
        .collect();

    let mut shuffle_rng = seeded_rng(derive_seed(cfg.seed, SALT_SHUFFLE));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut train_loss = Vec::with_capacity(cfg.epochs);
    let mut valid_loss = Vec::new();

    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut epoch_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            for &idx in batch {
                let loss = sample_loss(cfg, net.as_ref(), &train[idx])?;
                epoch_sum += loss.scalar_value();
                reverse_sweep(&loss)?;
            }
            let scale = 1.0 / batch.len() as f64;
            for ((_, param), state) in params.iter().zip(&mut states) {
                param.scale_grad(scale);
                adam_step(param, state);
            }
        }
        train_loss.push(epoch_sum / train.len() as f64);
        if let Some(v) = valid {
            let mut sum = 0.0;
            for record in v {
                sum += sample_loss(cfg, net.as_ref(), record)?.scalar_value();
            }
            valid_loss.push(sum / v.len() as f64);
        }
    }

    Ok(TrainedModel {
        net,
        train_loss,
        valid_loss,
    })
}
