use numeric_core::graph::Var;
use numeric_core::ops;
use numeric_core::{AdamConfig, NumericError};

use crate::error::ModelError;

/// The seven architectures, one per input-feature combination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArchitectureId {
    Img,
    HmapStatic,
    HmapTemporal,
    Text,
    TextImgFusion,
    GazeSupervisedUnet,
    TemporalImgFusion,
}

impl ArchitectureId {
    pub const ALL: [ArchitectureId; 7] = [
        ArchitectureId::Img,
        ArchitectureId::HmapStatic,
        ArchitectureId::HmapTemporal,
        ArchitectureId::Text,
        ArchitectureId::TextImgFusion,
        ArchitectureId::GazeSupervisedUnet,
        ArchitectureId::TemporalImgFusion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ArchitectureId::Img => "IMG",
            ArchitectureId::HmapStatic => "HMAP_STATIC",
            ArchitectureId::HmapTemporal => "HMAP_TEMPORAL",
            ArchitectureId::Text => "TEXT",
            ArchitectureId::TextImgFusion => "TEXT_IMG_FUSION",
            ArchitectureId::GazeSupervisedUnet => "GAZE_SUPERVISED_UNET",
            ArchitectureId::TemporalImgFusion => "TEMPORAL_IMG_FUSION",
        }
    }

    pub fn from_name(name: &str) -> Result<ArchitectureId, ModelError> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == name)
            .ok_or_else(|| {
                ModelError::Config(format!(
                    "unknown architecture {name:?}; expected one of {:?}",
                    Self::ALL.map(|a| a.name())
                ))
            })
    }

    /// Whether the attention-map decoder branch exists.
    pub fn emits_attention(self) -> bool {
        matches!(self, ArchitectureId::GazeSupervisedUnet)
    }
}

/// Everything needed to build and train one model.
#[derive(Clone, Debug)]
pub struct ModelConfig {
    pub arch: ArchitectureId,
    pub image_size: usize,
    /// Encoder widths per conv-conv-pool block.
    pub channels: [usize; 4],
    /// Width of the image feature after the encoder's first dense layer.
    pub img_feature: usize,
    /// Width of the text branch.
    pub text_feature: usize,
    /// LSTM hidden size; also the per-frame embedding width.
    pub lstm_hidden: usize,
    pub text_dim: usize,
    pub t_frames: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    /// Adds the gaze-heatmap MSE term to the objective.
    pub heatmap_loss: bool,
    /// Attaches the text branch to the unet classifier head.
    pub unet_text: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            arch: ArchitectureId::Img,
            image_size: 64,
            channels: [8, 16, 32, 64],
            img_feature: 32,
            text_feature: 64,
            lstm_hidden: 32,
            text_dim: 150,
            t_frames: 8,
            epochs: 30,
            batch_size: 16,
            optimizer: AdamConfig::default(),
            heatmap_loss: false,
            unet_text: false,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn uses_image(&self) -> bool {
        matches!(
            self.arch,
            ArchitectureId::Img
                | ArchitectureId::TextImgFusion
                | ArchitectureId::GazeSupervisedUnet
                | ArchitectureId::TemporalImgFusion
        )
    }

    pub fn uses_static_map(&self) -> bool {
        self.arch == ArchitectureId::HmapStatic
    }

    pub fn uses_frames(&self) -> bool {
        matches!(
            self.arch,
            ArchitectureId::HmapTemporal | ArchitectureId::TemporalImgFusion
        )
    }

    pub fn uses_text(&self) -> bool {
        matches!(self.arch, ArchitectureId::Text | ArchitectureId::TextImgFusion)
            || (self.arch == ArchitectureId::GazeSupervisedUnet && self.unet_text)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.heatmap_loss && self.arch != ArchitectureId::GazeSupervisedUnet {
            return Err(ModelError::Config(format!(
                "heatmap loss is only valid for GAZE_SUPERVISED_UNET, not {}",
                self.arch.name()
            )));
        }
        if self.unet_text && self.arch != ArchitectureId::GazeSupervisedUnet {
            return Err(ModelError::Config(
                "unet_text is only valid for GAZE_SUPERVISED_UNET".into(),
            ));
        }
        if self.channels.iter().any(|&c| c == 0) {
            return Err(ModelError::Config("channel widths must be positive".into()));
        }
        let needs_16 = self.uses_image() || self.uses_static_map();
        if needs_16 && self.image_size % 16 != 0 {
            return Err(ModelError::Config(format!(
                "image size {} is not divisible by 16 (four pooling stages)",
                self.image_size
            )));
        }
        if self.uses_frames() && self.image_size % 8 != 0 {
            return Err(ModelError::Config(format!(
                "image size {} is not divisible by 8 (three pooling stages)",
                self.image_size
            )));
        }
        if self.batch_size == 0 {
            return Err(ModelError::Config("batch size must be >= 1".into()));
        }
        if self.img_feature == 0 || self.text_feature == 0 || self.lstm_hidden == 0 {
            return Err(ModelError::Config("feature widths must be positive".into()));
        }
        Ok(())
    }
}

/// Fixed multi-loss mixture from the source hyperparameter report.
pub const HEATMAP_LOSS_WEIGHT: f64 = 0.5827;
pub const CLASS_LOSS_WEIGHT: f64 = 0.4173;

/// The two weights as a pair, summing to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossWeights {
    pub w_heatmap: f64,
    pub w_class: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            w_heatmap: HEATMAP_LOSS_WEIGHT,
            w_class: CLASS_LOSS_WEIGHT,
        }
    }
}

/// total = 0.5827 * alpha + 0.4173 * beta, exactly.
pub fn combined_loss(alpha: f64, beta: f64) -> f64 {
    HEATMAP_LOSS_WEIGHT * alpha + CLASS_LOSS_WEIGHT * beta
}

/// Graph node version used during training.
pub fn combined_loss_node(alpha: &Var, beta: &Var) -> Result<Var, NumericError> {
    ops::add(
        &ops::scale(alpha, HEATMAP_LOSS_WEIGHT),
        &ops::scale(beta, CLASS_LOSS_WEIGHT),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_weights_are_the_published_constants() {
        assert_eq!(combined_loss(1.0, 0.0), 0.5827);
        assert_eq!(combined_loss(0.0, 1.0), 0.4173);
        assert_eq!(combined_loss(0.0, 0.0), 0.0);
        let w = LossWeights::default();
        assert!((w.w_heatmap + w.w_class - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combined_loss_is_linear() {
        let (a1, a2) = (0.3, 1.7);
        let (b1, b2) = (0.9, 0.2);
        let lhs = combined_loss(a1 + a2, b1 + b2);
        let rhs = combined_loss(a1, b1) + combined_loss(a2, b2);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn heatmap_loss_flag_requires_the_unet() {
        let cfg = ModelConfig {
            arch: ArchitectureId::Img,
            heatmap_loss: true,
            ..ModelConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ModelError::Config(_))));
        let ok = ModelConfig {
            arch: ArchitectureId::GazeSupervisedUnet,
            heatmap_loss: true,
            ..ModelConfig::default()
        };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn architecture_names_round_trip() {
        for arch in ArchitectureId::ALL {
            assert_eq!(ArchitectureId::from_name(arch.name()).unwrap(), arch);
        }
        assert!(ArchitectureId::from_name("NOPE").is_err());
    }
}
