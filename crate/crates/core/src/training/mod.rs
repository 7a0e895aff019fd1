//! Batched training: padding/masking, summed start+end cross-entropy,
//! Adam updates, checkpointing, deterministic seeding.

pub mod batch;
pub mod trainer;

pub use batch::{Batch, PaddedView};
pub use trainer::{
    compute_loss, loss_log_csv, train, train_df_table, EpochLog, TrainConfig, TrainOutput,
};
