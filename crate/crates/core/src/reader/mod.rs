//! The span reader: frozen embeddings, static token features, aligned
//! question attention, BiLSTM encoders, bilinear start/end scoring, and
//! decoding.

pub mod decode;
pub mod embedding;
pub mod features;
pub mod model;

pub use decode::{decode_span, DecodeMode, SpanPrediction};
pub use embedding::{EmbeddingTable, UNK_WORD};
pub use features::{
    exact_match_features, feature_width, prepare_example, prepare_tokens, static_features,
    token_features, FeatureMask, PreparedExample, STATIC_WIDTH,
};
pub use model::{
    encode_for_inspection, example_loss, forward, forward_from_features, init_params,
    predict_distributions, DropoutPlan, ModelParams, ParagraphEncoding, QuestionEncoding,
    ReaderConfig, ReaderForward,
};
