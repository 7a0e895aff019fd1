//! TF-IDF over paragraphs-as-documents. The document-frequency table is
//! built over the training split only and read-only afterwards.
//!
//! tf = count(lower in paragraph) / len(paragraph)
//! idf = ln(n_paragraphs / (1 + df))
//! tfidf = max(0, tf · idf)

use crate::error::{CoreError, Result};
use crate::text::token::Token;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct DfTable {
    df: HashMap<String, u32>,
    n_paragraphs: usize,
}

impl DfTable {
    /// Count, for every lowercased word, how many paragraphs contain it.
    pub fn build<'a, I>(paragraphs: I) -> Self
    where
        I: IntoIterator<Item = &'a [Token]>,
    {
        let mut df: HashMap<String, u32> = HashMap::new();
        let mut n = 0usize;
        for tokens in paragraphs {
            n += 1;
            let uniq: BTreeSet<&str> = tokens.iter().map(|t| t.lower.as_str()).collect();
            for w in uniq {
                *df.entry(w.to_string()).or_insert(0) += 1;
            }
        }
        DfTable { df, n_paragraphs: n }
    }

    pub fn n_paragraphs(&self) -> usize {
        self.n_paragraphs
    }

    /// Paragraphs containing the word; unseen words get 0.
    pub fn df(&self, lower: &str) -> u32 {
        self.df.get(lower).copied().unwrap_or(0)
    }

    pub fn tfidf_of(&self, tf: f64, df: u32) -> f64 {
        let idf = (self.n_paragraphs as f64 / (1.0 + df as f64)).ln();
        (tf * idf).max(0.0)
    }

    /// Table with one empty paragraph: every idf is ln(1) = 0, so every
    /// score is 0. The fallback when no training-split table exists.
    pub fn neutral() -> Self {
        DfTable {
            df: HashMap::new(),
            n_paragraphs: 1,
        }
    }

    /// Persist as tab-separated `word<TAB>count` lines under a header
    /// carrying the paragraph count.
    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        let mut entries: Vec<(&str, u32)> =
            self.df.iter().map(|(w, c)| (w.as_str(), *c)).collect();
        entries.sort();
        let mut out = format!("#paragraphs\t{}\n", self.n_paragraphs);
        for (w, c) in entries {
            let _ = writeln!(out, "{w}\t{c}");
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load_tsv(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        let label = path.display().to_string();
        let mut lines = content.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| CoreError::ParseAt {
            path: label.clone(),
            line: 1,
            msg: "empty df table".into(),
        })?;
        let n_paragraphs = header
            .strip_prefix("#paragraphs\t")
            .and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| CoreError::ParseAt {
                path: label.clone(),
                line: 1,
                msg: "expected '#paragraphs\\t<count>' header".into(),
            })?;
        let mut df = HashMap::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (word, count) = line.split_once('\t').ok_or_else(|| CoreError::ParseAt {
                path: label.clone(),
                line: idx + 1,
                msg: "expected 'word\\tcount'".into(),
            })?;
            let count = count.parse::<u32>().map_err(|_| CoreError::ParseAt {
                path: label.clone(),
                line: idx + 1,
                msg: format!("bad count '{count}'"),
            })?;
            df.insert(word.to_string(), count);
        }
        Ok(DfTable { df, n_paragraphs })
    }
}

/// Per-token scores for one paragraph, at full precision.
pub fn compute_tfidf_f64(paragraph_tokens: &[Token], table: &DfTable) -> Result<Vec<f64>> {
    if table.n_paragraphs == 0 {
        return Err(CoreError::EmptyInput(
            "document-frequency table built over zero paragraphs".into(),
        ));
    }
    if paragraph_tokens.is_empty() {
        return Ok(Vec::new());
    }
    let len = paragraph_tokens.len() as f64;
    let mut counts: HashMap<&str, u32> = HashMap::new();
    for t in paragraph_tokens {
        *counts.entry(t.lower.as_str()).or_insert(0) += 1;
    }
    Ok(paragraph_tokens
        .iter()
        .map(|t| {
            let tf = counts[t.lower.as_str()] as f64 / len;
            table.tfidf_of(tf, table.df(&t.lower))
        })
        .collect())
}

/// Per-token scores narrowed to the feature dtype.
pub fn compute_tfidf(paragraph_tokens: &[Token], table: &DfTable) -> Result<Vec<f32>> {
    Ok(compute_tfidf_f64(paragraph_tokens, table)?
        .into_iter()
        .map(|v| v as f32)
        .collect())
}

/// Write scores into the tokens in place.
pub fn apply_tfidf(tokens: &mut [Token], table: &DfTable) -> Result<()> {
    let scores = compute_tfidf(tokens, table)?;
    for (t, s) in tokens.iter_mut().zip(scores) {
        t.tfidf = s;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize::tokenize;

    fn table_of(paragraphs: &[&str]) -> (DfTable, Vec<Vec<Token>>) {
        let tokenized: Vec<Vec<Token>> = paragraphs.iter().map(|p| tokenize(p)).collect();
        let table = DfTable::build(tokenized.iter().map(|t| t.as_slice()));
        (table, tokenized)
    }

    #[test]
    fn ubiquitous_token_clamps_to_zero() {
        // "war" in every paragraph of a 3-paragraph corpus, once in a
        // 10-token paragraph: tf = 0.1, idf = ln(3/4) < 0 -> clamped 0.
        let (table, toks) = table_of(&[
            "war a b c d e f g h i",
            "war x y",
            "war z",
        ]);
        assert_eq!(toks[0].len(), 10);
        let scores = compute_tfidf(&toks[0], &table).unwrap();
        assert_eq!(scores[0], 0.0);
    }

    #[test]
    fn unique_token_hand_value() {
        // "siege" unique to one paragraph of 4, twice in a 10-token
        // paragraph: 0.2 · ln(4/2) = 0.13863.
        let (table, toks) = table_of(&[
            "siege siege a b c d e f g h",
            "x1 y1",
            "x2 y2",
            "x3 y3",
        ]);
        assert_eq!(toks[0].len(), 10);
        let scores = compute_tfidf(&toks[0], &table).unwrap();
        let expected = 0.2 * (4.0f64 / 2.0).ln();
        assert!((scores[0] as f64 - expected).abs() < 1e-7, "{}", scores[0]);
    }

    #[test]
    fn empty_paragraph_is_vacuous() {
        let (table, _) = table_of(&["a b", "c d"]);
        assert!(compute_tfidf(&[], &table).unwrap().is_empty());
    }

    #[test]
    fn zero_paragraph_table_is_an_error() {
        let table = DfTable::default();
        let toks = tokenize("a");
        assert!(compute_tfidf(&toks, &table).is_err());
    }

    #[test]
    fn monotone_nonincreasing_in_df() {
        // With tf fixed, tfidf never grows as df rises.
        let table = DfTable {
            df: Default::default(),
            n_paragraphs: 12,
        };
        let tf = 0.25;
        let mut prev = f64::INFINITY;
        for df in 0..=12u32 {
            let v = table.tfidf_of(tf, df);
            assert!(v <= prev + 1e-12, "df {df}: {v} > {prev}");
            prev = v;
        }
    }
}
