//! Static per-token features: exact match against the question (surface
//! and lemma), one-hot POS, one-hot NER, and the TF-IDF scalar. Masked
//! groups contribute zero blocks of unchanged width, so ablations never
//! change tensor shapes.

use crate::corpus::QAExample;
use crate::error::{CoreError, Result};
use crate::reader::embedding::EmbeddingTable;
use crate::text::{Token, NER_WIDTH, POS_WIDTH};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Ablation switches. `use_pos`, `use_ner`, and `use_tfidf` jointly off is
/// the "no token features" configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub use_exact_match: bool,
    pub use_pos: bool,
    pub use_ner: bool,
    pub use_tfidf: bool,
    pub use_aligned: bool,
}

impl FeatureMask {
    pub fn full() -> Self {
        FeatureMask {
            use_exact_match: true,
            use_pos: true,
            use_ner: true,
            use_tfidf: true,
            use_aligned: true,
        }
    }

    pub fn none() -> Self {
        FeatureMask {
            use_exact_match: false,
            use_pos: false,
            use_ner: false,
            use_tfidf: false,
            use_aligned: false,
        }
    }
}

impl Default for FeatureMask {
    fn default() -> Self {
        Self::full()
    }
}

pub const EXACT_MATCH_WIDTH: usize = 2;
pub const TOKEN_FEATURE_WIDTH: usize = POS_WIDTH + NER_WIDTH + 1;
pub const STATIC_WIDTH: usize = EXACT_MATCH_WIDTH + TOKEN_FEATURE_WIDTH;

/// Total p̃ width for an embedding dimension: embedding, exact match,
/// token features, aligned question embedding.
pub fn feature_width(embedding_dim: usize) -> usize {
    embedding_dim + STATIC_WIDTH + embedding_dim
}

/// Two indicators per paragraph token: surface form appears in the
/// question (case-insensitive), lemma appears among question lemmas.
pub fn exact_match_features(p_tokens: &[Token], q_tokens: &[Token]) -> Vec<[f32; 2]> {
    let q_lower: HashSet<&str> = q_tokens.iter().map(|t| t.lower.as_str()).collect();
    let q_lemma: HashSet<&str> = q_tokens.iter().map(|t| t.lemma.as_str()).collect();
    p_tokens
        .iter()
        .map(|t| {
            [
                if q_lower.contains(t.lower.as_str()) { 1.0 } else { 0.0 },
                if q_lemma.contains(t.lemma.as_str()) { 1.0 } else { 0.0 },
            ]
        })
        .collect()
}

/// One-hot POS ++ one-hot NER ++ tfidf scalar, with masked groups zeroed
/// in place.
pub fn token_features(token: &Token, mask: &FeatureMask) -> Vec<f32> {
    let mut out = vec![0.0f32; TOKEN_FEATURE_WIDTH];
    if mask.use_pos {
        out[token.pos.index()] = 1.0;
    }
    if mask.use_ner {
        out[POS_WIDTH + token.ner.index()] = 1.0;
    }
    if mask.use_tfidf {
        out[POS_WIDTH + NER_WIDTH] = token.tfidf;
    }
    out
}

/// The full static block per paragraph token (exact match ++ token
/// features), mask already applied.
pub fn static_features(
    p_tokens: &[Token],
    q_tokens: &[Token],
    mask: &FeatureMask,
) -> Vec<Vec<f32>> {
    let exact = exact_match_features(p_tokens, q_tokens);
    p_tokens
        .iter()
        .zip(exact)
        .map(|(t, em)| {
            let mut row = Vec::with_capacity(STATIC_WIDTH);
            if mask.use_exact_match {
                row.extend_from_slice(&em);
            } else {
                row.extend_from_slice(&[0.0, 0.0]);
            }
            row.extend(token_features(t, mask));
            row
        })
        .collect()
}

/// One example, featurized and ready for the reader graph. TF-IDF values
/// must already be written into the paragraph tokens.
#[derive(Debug, Clone)]
pub struct PreparedExample {
    pub para_embeds: Vec<Vec<f32>>,
    pub static_feats: Vec<Vec<f32>>,
    pub q_embeds: Vec<Vec<f32>>,
    pub gold_start: usize,
    pub gold_end: usize,
    pub use_aligned: bool,
    pub embedding_dim: usize,
}

impl PreparedExample {
    pub fn para_len(&self) -> usize {
        self.para_embeds.len()
    }

    pub fn question_len(&self) -> usize {
        self.q_embeds.len()
    }
}

pub fn prepare_example(
    example: &QAExample,
    table: &EmbeddingTable,
    mask: &FeatureMask,
) -> Result<PreparedExample> {
    prepare_tokens(
        &example.paragraph.tokens,
        &example.question_tokens,
        example.answer_start,
        example.answer_end,
        table,
        mask,
    )
}

/// Like [`prepare_example`] but with TF-IDF scores from the given table
/// written into a working copy of the paragraph tokens first.
pub fn prepare_with_tfidf(
    example: &QAExample,
    table: &EmbeddingTable,
    df: &crate::text::DfTable,
    mask: &FeatureMask,
) -> Result<PreparedExample> {
    let mut p_tokens = example.paragraph.tokens.clone();
    crate::text::apply_tfidf(&mut p_tokens, df)?;
    prepare_tokens(
        &p_tokens,
        &example.question_tokens,
        example.answer_start,
        example.answer_end,
        table,
        mask,
    )
}

pub fn prepare_tokens(
    p_tokens: &[Token],
    q_tokens: &[Token],
    gold_start: usize,
    gold_end: usize,
    table: &EmbeddingTable,
    mask: &FeatureMask,
) -> Result<PreparedExample> {
    if p_tokens.is_empty() {
        return Err(CoreError::EmptyInput("empty paragraph".into()));
    }
    if q_tokens.is_empty() {
        return Err(CoreError::EmptyInput("empty question".into()));
    }
    Ok(PreparedExample {
        para_embeds: table.embed_tokens(p_tokens),
        static_feats: static_features(p_tokens, q_tokens, mask),
        q_embeds: table.embed_tokens(q_tokens),
        gold_start,
        gold_end,
        use_aligned: mask.use_aligned,
        embedding_dim: table.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::annotate;

    #[test]
    fn lemma_match_without_surface_match() {
        // paragraph "attempted", question contains "attempt": [0, 1]
        let p = annotate("charles attempted negotiations");
        let q = annotate("when did charles attempt negotiations ?");
        let feats = exact_match_features(&p, &q);
        assert_eq!(feats[1], [0.0, 1.0]);
        // identical token both sides
        assert_eq!(feats[0], [1.0, 1.0]);
        // no overlap
        let q2 = annotate("what happened next ?");
        let feats2 = exact_match_features(&p, &q2);
        assert_eq!(feats2[1], [0.0, 0.0]);
    }

    #[test]
    fn one_hot_layout() {
        let mut tokens = annotate("1939");
        tokens[0].tfidf = 0.2;
        let t = &tokens[0];
        assert_eq!(t.pos, crate::text::PosTag::Num);
        assert_eq!(t.ner, crate::text::NerTag::Date);
        let f = token_features(t, &FeatureMask::full());
        assert_eq!(f.len(), TOKEN_FEATURE_WIDTH);
        assert_eq!(f[t.pos.index()], 1.0);
        assert_eq!(f[POS_WIDTH + t.ner.index()], 1.0);
        assert_eq!(f[POS_WIDTH + NER_WIDTH], 0.2);
        assert_eq!(f.iter().filter(|v| **v != 0.0).count(), 3);
    }

    #[test]
    fn masked_groups_keep_width() {
        let tokens = annotate("the war");
        let mask = FeatureMask {
            use_pos: false,
            ..FeatureMask::full()
        };
        let f = token_features(&tokens[0], &mask);
        assert_eq!(f.len(), TOKEN_FEATURE_WIDTH);
        assert!(f[..POS_WIDTH].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn o_tag_slot_is_hot_for_plain_tokens() {
        let tokens = annotate("king");
        let f = token_features(&tokens[0], &FeatureMask::full());
        assert_eq!(f[POS_WIDTH + crate::text::NerTag::O.index()], 1.0);
    }

    #[test]
    fn default_width_arithmetic() {
        // 300 + 2 + 17 + 8 + 1 + 300
        assert_eq!(feature_width(300), 628);
    }
}
