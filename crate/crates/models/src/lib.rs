//! The pipeline's model zoo: seven architectures over image, gaze, and
//! text inputs, the weighted two-term training objective, a seeded
//! mini-batch Adam training loop, and flat binary parameter persistence.

pub mod config;
pub mod error;
pub mod inputs;
pub mod nets;
pub mod persist;
pub mod train;

pub use config::{
    combined_loss, combined_loss_node, ArchitectureId, LossWeights, ModelConfig,
    CLASS_LOSS_WEIGHT, HEATMAP_LOSS_WEIGHT,
};
pub use error::ModelError;
pub use inputs::StudyInputs;
pub use nets::{build_net, predict, Forward, Net};
pub use persist::{load_params, restore, save_params, snapshot};
pub use train::{train_model, TrainedModel};
