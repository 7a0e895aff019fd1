//! Minimal deterministic tensor and network substrate: dense layers,
//! LSTM, masked softmax, cross-entropy, Adam, a recorded-tape reverse
//! pass, and a finite-difference gradient checker.

pub mod checkpoint;
pub mod gradcheck;
pub mod lstm;
pub mod ops;
pub mod scalar;
pub mod store;
pub mod tape;
pub mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use scalar::Scalar;
pub use store::{OptimizerConfig, ParameterStore};
pub use tape::{Activation, Graph, NodeId};
pub use tensor::Tensor;
