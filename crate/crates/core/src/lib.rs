//! Extractive question answering over temporal expressions: a TIMEX2
//! corpus pipeline, a feature-rich neural span reader, and the training,
//! evaluation, and ablation harness around it.

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod nn;
pub mod reader;
pub mod text;
pub mod training;

pub use error::{CoreError, Result};
