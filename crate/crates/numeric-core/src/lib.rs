//! Reverse-mode differentiable array engine.
//!
//! Provides exactly the kernels the pipeline's architectures need (conv,
//! pooling, affine, activations, softmax, LSTM recurrences, upsampling,
//! losses), a computation graph with gradient accumulation, an Adam
//! optimizer, and a finite-difference gradient verifier. Float64
//! throughout; all randomness flows through explicit seeds.

pub mod array;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod lstm;
pub mod ops;
pub mod optim;
pub mod rng;

pub use array::NdArray;
pub use error::NumericError;
pub use gradcheck::finite_diff_check;
pub use graph::{reverse_sweep, Var};
pub use lstm::{bilstm, BiLstm, LstmCell};
pub use ops::Activation;
pub use optim::{adam_step, AdamConfig, AdamState};
