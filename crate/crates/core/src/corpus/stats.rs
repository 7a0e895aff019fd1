//! Corpus-level counts: paragraphs, QA pairs, timexes, timex density.

use crate::corpus::dataset::Dataset;
use crate::corpus::timex2::ParsedDocument;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusStats {
    pub n_documents: usize,
    pub n_paragraphs: usize,
    pub n_questions: usize,
    pub n_timexes: usize,
    /// timexes per document, rounded to 2 decimals (0 when no documents)
    pub timex_per_doc: f64,
}

fn density(n_timexes: usize, n_documents: usize) -> f64 {
    if n_documents == 0 {
        0.0
    } else {
        (n_timexes as f64 / n_documents as f64 * 100.0).round() / 100.0
    }
}

impl CorpusStats {
    pub fn from_documents(docs: &[ParsedDocument]) -> Self {
        let n_timexes = docs.iter().map(|d| d.timexes.len()).sum();
        CorpusStats {
            n_documents: docs.len(),
            n_paragraphs: 0,
            n_questions: 0,
            n_timexes,
            timex_per_doc: density(n_timexes, docs.len()),
        }
    }

    pub fn from_dataset(dataset: &Dataset) -> Self {
        let paragraphs = dataset.paragraphs();
        let docs: BTreeSet<&str> = paragraphs.iter().map(|p| p.doc_id.as_str()).collect();
        let n_timexes: usize = paragraphs.iter().map(|p| p.timexes.len()).sum();
        CorpusStats {
            n_documents: docs.len(),
            n_paragraphs: paragraphs.len(),
            n_questions: dataset.examples.len(),
            n_timexes,
            timex_per_doc: density(n_timexes, docs.len()),
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "documents={} paragraphs={} questions={} timexes={} timex/doc={:.2}",
            self.n_documents, self.n_paragraphs, self.n_questions, self.n_timexes,
            self.timex_per_doc
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::timex2::TimexSpan;

    fn doc(n_timexes: usize) -> ParsedDocument {
        ParsedDocument {
            text: "x".repeat(n_timexes + 1),
            timexes: (0..n_timexes)
                .map(|i| TimexSpan {
                    char_start: i,
                    char_end: i + 1,
                    text: "x".into(),
                    val: None,
                })
                .collect(),
        }
    }

    #[test]
    fn density_arithmetic() {
        let stats = CorpusStats::from_documents(&[doc(3), doc(5)]);
        assert_eq!(stats.timex_per_doc, 4.00);
        assert_eq!(stats.n_timexes, 8);
    }

    #[test]
    fn empty_document_list_is_zeros() {
        let stats = CorpusStats::from_documents(&[]);
        assert_eq!(stats.n_documents, 0);
        assert_eq!(stats.timex_per_doc, 0.0);
    }
}
