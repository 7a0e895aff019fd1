//! Tokenization, lemmatization, fallback POS tagging, pattern-based
//! temporal NER, and TF-IDF. These stages produce the token features the
//! reader consumes; gold annotations in a dataset always win over the
//! fallback taggers.

pub mod lemma;
pub mod ner;
pub mod pos;
pub mod tfidf;
pub mod token;
pub mod tokenize;

pub use lemma::lemmatize;
pub use ner::{default_patterns, temporal_ner, TemporalPattern, TimexKind};
pub use pos::pos_tag;
pub use tfidf::{apply_tfidf, compute_tfidf, compute_tfidf_f64, DfTable};
pub use token::{detokenize, NerTag, PosTag, Token, NER_WIDTH, POS_WIDTH};
pub use tokenize::tokenize;

/// Run the fallback pipeline over raw text: tokenize, tag, lemmatize,
/// recognize temporal entities. TF-IDF stays 0 until a document-frequency
/// table exists.
pub fn annotate(text: &str) -> Vec<Token> {
    let mut tokens = tokenize(text);
    annotate_tokens(&mut tokens);
    tokens
}

/// Fill pos/lemma/ner on already-tokenized text, leaving any fields the
/// caller pre-set only if `overwrite` semantics are not needed (this
/// always overwrites; use the corpus loader for gold-priority merging).
pub fn annotate_tokens(tokens: &mut [Token]) {
    let tags = pos_tag(tokens);
    for (t, tag) in tokens.iter_mut().zip(tags) {
        t.pos = tag;
        t.lemma = lemmatize(&t.text, tag);
    }
    let ner_tags = temporal_ner(tokens, default_patterns());
    for (t, tag) in tokens.iter_mut().zip(ner_tags) {
        t.ner = tag;
    }
}
