//! The neural span reader: aligned question attention over a one-layer
//! feed-forward projection of frozen embeddings, bidirectional LSTM
//! encoders for paragraph and question, attention-pooled question vector,
//! and two bilinear classifiers scoring every paragraph position as the
//! answer start and end.

use crate::error::{CoreError, Result};
use crate::nn::lstm::{register_bilstm, BiLstm};
use crate::nn::scalar::Scalar;
use crate::nn::store::ParameterStore;
use crate::nn::tape::{Activation, Graph, NodeId};
use crate::nn::tensor::Tensor;
use crate::reader::features::{feature_width, PreparedExample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReaderConfig {
    pub embedding_dim: usize,
    /// LSTM hidden size per direction; encoder outputs are twice this.
    pub hidden_size: usize,
    pub max_span_len: usize,
    pub dropout: f64,
}

impl Default for ReaderConfig {
    fn default() -> Self {
        ReaderConfig {
            embedding_dim: 300,
            hidden_size: 128,
            max_span_len: 15,
            dropout: 0.0,
        }
    }
}

impl ReaderConfig {
    pub fn encoder_dim(&self) -> usize {
        2 * self.hidden_size
    }
}

/// All learned tensors plus the dimensions they were built for.
#[derive(Debug, Clone)]
pub struct ModelParams<S: Scalar = f32> {
    pub store: ParameterStore<S>,
    pub config: ReaderConfig,
}

pub const ALPHA_W: &str = "alpha.w";
pub const ALPHA_B: &str = "alpha.b";
pub const PARA_RNN: &str = "para_rnn";
pub const QUESTION_RNN: &str = "q_rnn";
pub const POOL_W: &str = "pool.w";
pub const SPAN_START_W: &str = "span.start.w";
pub const SPAN_END_W: &str = "span.end.w";

impl<S: Scalar> ModelParams<S> {
    pub fn to_f64(&self) -> ModelParams<f64> {
        ModelParams {
            store: self.store.to_f64(),
            config: self.config,
        }
    }

    pub fn to_f32(&self) -> ModelParams<f32> {
        ModelParams {
            store: self.store.to_f32(),
            config: self.config,
        }
    }
}

/// Fresh parameters, deterministic per seed.
pub fn init_params(config: &ReaderConfig, seed: u64) -> Result<ModelParams<f32>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut store = ParameterStore::new();
    let dim = config.embedding_dim;
    let h = config.hidden_size;
    let enc = config.encoder_dim();

    let bound = 1.0 / (dim as f64).sqrt();
    store.register(ALPHA_W, uniform(&[dim, dim], bound, &mut rng))?;
    store.register(ALPHA_B, Tensor::zeros(vec![dim]))?;

    register_bilstm(&mut store, PARA_RNN, feature_width(dim), h, &mut rng)?;
    register_bilstm(&mut store, QUESTION_RNN, dim, h, &mut rng)?;

    let enc_bound = 1.0 / (enc as f64).sqrt();
    store.register(POOL_W, uniform(&[enc], enc_bound, &mut rng))?;
    store.register(SPAN_START_W, uniform(&[enc, enc], enc_bound, &mut rng))?;
    store.register(SPAN_END_W, uniform(&[enc, enc], enc_bound, &mut rng))?;

    Ok(ModelParams {
        store,
        config: *config,
    })
}

fn uniform<R: Rng>(shape: &[usize], bound: f64, rng: &mut R) -> Tensor<f32> {
    crate::nn::lstm::random_tensor(shape, bound, rng)
}

/// Handles into one example's forward graph.
pub struct ReaderForward {
    /// p̃_i nodes, one per paragraph token
    pub feature_vectors: Vec<NodeId>,
    /// p'_i encoder states
    pub para_states: Vec<NodeId>,
    /// q'_j encoder states
    pub question_states: Vec<NodeId>,
    /// attention rows a[i][·], present unless the aligned feature is off
    pub attention_rows: Option<Vec<NodeId>>,
    /// question word weights b
    pub question_weights: NodeId,
    /// pooled question vector q
    pub pooled_question: NodeId,
    pub start_logits: NodeId,
    pub end_logits: NodeId,
}

/// Per-example dropout draws, sampled outside the graph so a run is a
/// pure function of the RNG stream.
pub struct DropoutPlan {
    keep_prob: f64,
    para_masks: Vec<Vec<bool>>,
    q_masks: Vec<Vec<bool>>,
}

impl DropoutPlan {
    pub fn sample(
        rng: &mut ChaCha20Rng,
        rate: f64,
        para_len: usize,
        q_len: usize,
        feature_dim: usize,
        embedding_dim: usize,
    ) -> Option<DropoutPlan> {
        if rate <= 0.0 {
            return None;
        }
        let keep_prob = 1.0 - rate;
        let mut draw = |len: usize, dim: usize| -> Vec<Vec<bool>> {
            (0..len)
                .map(|_| (0..dim).map(|_| rng.gen_bool(keep_prob)).collect())
                .collect()
        };
        Some(DropoutPlan {
            keep_prob,
            para_masks: draw(para_len, feature_dim),
            q_masks: draw(q_len, embedding_dim),
        })
    }
}

fn to_scalar_vec<S: Scalar>(v: &[f32]) -> Tensor<S> {
    Tensor::vector(v.iter().map(|&x| S::from_f32(x)).collect())
}

/// Build p̃_i nodes: frozen embedding, static feature block, and the
/// aligned question attention (a zero block when masked off).
pub fn build_features<S: Scalar>(
    g: &mut Graph<S>,
    params: &ModelParams<S>,
    ex: &PreparedExample,
) -> Result<(Vec<NodeId>, Option<Vec<NodeId>>)> {
    if ex.q_embeds.is_empty() {
        return Err(CoreError::EmptyInput("empty question".into()));
    }
    let dim = ex.embedding_dim;
    let para_embed_nodes: Vec<NodeId> = ex
        .para_embeds
        .iter()
        .map(|e| g.constant(to_scalar_vec(e)))
        .collect();
    let static_nodes: Vec<NodeId> = ex
        .static_feats
        .iter()
        .map(|f| g.constant(to_scalar_vec(f)))
        .collect();

    let (aligned_nodes, attention_rows) = if ex.use_aligned {
        let (aligned, rows) = aligned_attention(g, params, &para_embed_nodes, &ex.q_embeds)?;
        (aligned, Some(rows))
    } else {
        let zeros: Vec<NodeId> = (0..ex.para_len()).map(|_| g.zeros(dim)).collect();
        (zeros, None)
    };

    let mut features = Vec::with_capacity(ex.para_len());
    for i in 0..ex.para_len() {
        features.push(g.concat(vec![para_embed_nodes[i], static_nodes[i], aligned_nodes[i]])?);
    }
    Ok((features, attention_rows))
}

/// Soft alignment between paragraph and question words: row-stochastic
/// attention over question positions from dot products of the projected
/// embeddings, and the attention-weighted sum of question embeddings per
/// paragraph token.
pub fn aligned_attention<S: Scalar>(
    g: &mut Graph<S>,
    params: &ModelParams<S>,
    para_embed_nodes: &[NodeId],
    q_embeds: &[Vec<f32>],
) -> Result<(Vec<NodeId>, Vec<NodeId>)> {
    if q_embeds.is_empty() {
        return Err(CoreError::EmptyInput("empty question".into()));
    }
    let w = g.param(&params.store, ALPHA_W)?;
    let b = g.param(&params.store, ALPHA_B)?;

    let q_embed_tensors: Vec<Tensor<S>> = q_embeds.iter().map(|e| to_scalar_vec(e)).collect();
    let q_proj: Vec<NodeId> = q_embed_tensors
        .iter()
        .map(|t| {
            let node = g.constant(t.clone());
            g.dense(node, w, b, Activation::Relu)
        })
        .collect::<Result<_>>()?;

    let mut aligned = Vec::with_capacity(para_embed_nodes.len());
    let mut rows = Vec::with_capacity(para_embed_nodes.len());
    for &p_embed in para_embed_nodes {
        let p_proj = g.dense(p_embed, w, b, Activation::Relu)?;
        let scores: Vec<NodeId> = q_proj
            .iter()
            .map(|&qp| g.dot(p_proj, qp))
            .collect::<Result<_>>()?;
        let logits = g.stack(scores)?;
        let row = g.softmax(logits, None)?;
        let f_aligned = g.weighted_sum_const(row, q_embed_tensors.clone())?;
        aligned.push(f_aligned);
        rows.push(row);
    }
    Ok((aligned, rows))
}

/// Full forward pass over one example, from feature nodes already built.
/// Splitting here lets tests drive the encoder with hand-made features.
pub fn forward_from_features<S: Scalar>(
    g: &mut Graph<S>,
    params: &ModelParams<S>,
    feature_vectors: Vec<NodeId>,
    attention_rows: Option<Vec<NodeId>>,
    ex: &PreparedExample,
    dropout: Option<&DropoutPlan>,
) -> Result<ReaderForward> {
    if feature_vectors.is_empty() {
        return Err(CoreError::EmptyInput("empty paragraph".into()));
    }

    let para_inputs = match dropout {
        Some(plan) => feature_vectors
            .iter()
            .zip(&plan.para_masks)
            .map(|(&f, mask)| g.dropout(f, mask.clone(), plan.keep_prob))
            .collect::<Result<Vec<_>>>()?,
        None => feature_vectors.clone(),
    };

    let para_rnn = BiLstm::from_store(g, &params.store, PARA_RNN)?;
    let para_states = para_rnn.run(g, &para_inputs)?;

    let mut q_inputs: Vec<NodeId> = ex
        .q_embeds
        .iter()
        .map(|e| g.constant(to_scalar_vec(e)))
        .collect();
    if let Some(plan) = dropout {
        q_inputs = q_inputs
            .iter()
            .zip(&plan.q_masks)
            .map(|(&n, mask)| g.dropout(n, mask.clone(), plan.keep_prob))
            .collect::<Result<Vec<_>>>()?;
    }
    let q_rnn = BiLstm::from_store(g, &params.store, QUESTION_RNN)?;
    let question_states = q_rnn.run(g, &q_inputs)?;

    // b_j ∝ exp(w · q'_j); q = Σ b_j q'_j
    let pool_w = g.param(&params.store, POOL_W)?;
    let relevance: Vec<NodeId> = question_states
        .iter()
        .map(|&qs| g.dot(pool_w, qs))
        .collect::<Result<_>>()?;
    let rel_logits = g.stack(relevance)?;
    let question_weights = g.softmax(rel_logits, None)?;
    let pooled_question = g.weighted_sum_var(question_weights, question_states.clone())?;

    // bilinear span scores: p'_i · W · q for start and end
    let w_start = g.param(&params.store, SPAN_START_W)?;
    let w_end = g.param(&params.store, SPAN_END_W)?;
    let start_key = g.matvec(w_start, pooled_question)?;
    let end_key = g.matvec(w_end, pooled_question)?;
    let start_scores: Vec<NodeId> = para_states
        .iter()
        .map(|&ps| g.dot(ps, start_key))
        .collect::<Result<_>>()?;
    let end_scores: Vec<NodeId> = para_states
        .iter()
        .map(|&ps| g.dot(ps, end_key))
        .collect::<Result<_>>()?;
    let start_logits = g.stack(start_scores)?;
    let end_logits = g.stack(end_scores)?;

    Ok(ReaderForward {
        feature_vectors,
        para_states,
        question_states,
        attention_rows,
        question_weights,
        pooled_question,
        start_logits,
        end_logits,
    })
}

pub fn forward<S: Scalar>(
    g: &mut Graph<S>,
    params: &ModelParams<S>,
    ex: &PreparedExample,
    dropout: Option<&DropoutPlan>,
) -> Result<ReaderForward> {
    let (features, attention_rows) = build_features(g, params, ex)?;
    forward_from_features(g, params, features, attention_rows, ex, dropout)
}

/// Summed start+end cross-entropy for one example.
pub fn example_loss<S: Scalar>(
    g: &mut Graph<S>,
    fwd: &ReaderForward,
    gold_start: usize,
    gold_end: usize,
) -> Result<NodeId> {
    let ce_start = g.softmax_cross_entropy(fwd.start_logits, gold_start, None)?;
    let ce_end = g.softmax_cross_entropy(fwd.end_logits, gold_end, None)?;
    g.add(ce_start, ce_end)
}

/// Start and end distributions for one example, eagerly evaluated.
pub fn predict_distributions(
    params: &ModelParams<f32>,
    ex: &PreparedExample,
) -> Result<(Tensor<f32>, Tensor<f32>)> {
    let mut g = Graph::new();
    let fwd = forward(&mut g, params, ex, None)?;
    let p_start = g.softmax(fwd.start_logits, None)?;
    let p_end = g.softmax(fwd.end_logits, None)?;
    Ok((g.value(p_start).clone(), g.value(p_end).clone()))
}

/// Inspection view of the paragraph side: feature vectors, encoder
/// states, and the row-stochastic alignment matrix.
#[derive(Debug, Clone)]
pub struct ParagraphEncoding {
    pub feature_vectors: Vec<Tensor<f32>>,
    pub hidden_states: Vec<Tensor<f32>>,
    pub aligned_attention: Vec<Vec<f32>>,
}

/// Inspection view of the question side: encoder states, word weights,
/// and the pooled vector.
#[derive(Debug, Clone)]
pub struct QuestionEncoding {
    pub hidden_states: Vec<Tensor<f32>>,
    pub weights: Vec<f32>,
    pub pooled: Tensor<f32>,
}

pub fn encode_for_inspection(
    params: &ModelParams<f32>,
    ex: &PreparedExample,
) -> Result<(ParagraphEncoding, QuestionEncoding, Tensor<f32>, Tensor<f32>)> {
    let mut g = Graph::new();
    let fwd = forward(&mut g, params, ex, None)?;
    let p_start = g.softmax(fwd.start_logits, None)?;
    let p_end = g.softmax(fwd.end_logits, None)?;
    let para = ParagraphEncoding {
        feature_vectors: fwd.feature_vectors.iter().map(|&n| g.value(n).clone()).collect(),
        hidden_states: fwd.para_states.iter().map(|&n| g.value(n).clone()).collect(),
        aligned_attention: match &fwd.attention_rows {
            Some(rows) => rows.iter().map(|&r| g.value(r).data().to_vec()).collect(),
            None => Vec::new(),
        },
    };
    let question = QuestionEncoding {
        hidden_states: fwd.question_states.iter().map(|&n| g.value(n).clone()).collect(),
        weights: g.value(fwd.question_weights).data().to_vec(),
        pooled: g.value(fwd.pooled_question).clone(),
    };
    Ok((para, question, g.value(p_start).clone(), g.value(p_end).clone()))
}
