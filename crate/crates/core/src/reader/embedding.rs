//! Word-embedding table: text-format loader (one word plus its vector per
//! line), a deterministic random table for self-contained runs, and
//! lowercase lookup with an unknown-word row. Embeddings are frozen; they
//! never enter the parameter store.

use crate::error::{CoreError, Result};
use crate::text::Token;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const UNK_WORD: &str = "<unk>";

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: BTreeMap<String, usize>,
    matrix: Vec<f32>,
    unk_index: usize,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn unk_index(&self) -> usize {
        self.unk_index
    }

    /// Row index for a word; lookups lowercase their argument and misses
    /// map to the unknown row.
    pub fn lookup(&self, word: &str) -> usize {
        let lower = word.to_lowercase();
        self.vocab.get(&lower).copied().unwrap_or(self.unk_index)
    }

    pub fn row(&self, index: usize) -> &[f32] {
        &self.matrix[index * self.dim..(index + 1) * self.dim]
    }

    pub fn embed(&self, word: &str) -> &[f32] {
        self.row(self.lookup(word))
    }

    pub fn embed_tokens(&self, tokens: &[Token]) -> Vec<Vec<f32>> {
        tokens
            .iter()
            .map(|t| self.row(self.lookup(&t.lower)).to_vec())
            .collect()
    }

    /// Load the text format: `word v1 v2 ... vd`, single-space separated.
    /// The dimension is fixed by the first line; malformed rows report
    /// their line number. A missing `<unk>` entry is synthesized as the
    /// mean of all rows.
    pub fn load_text(path: &Path) -> Result<EmbeddingTable> {
        let content = fs::read_to_string(path)?;
        Self::parse_text(&content, &path.display().to_string())
    }

    pub fn parse_text(content: &str, label: &str) -> Result<EmbeddingTable> {
        let mut vocab = BTreeMap::new();
        let mut rows: Vec<(String, Vec<f32>)> = Vec::new();
        let mut dim: Option<usize> = None;
        for (idx, line) in content.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split(' ');
            let word = parts
                .next()
                .filter(|w| !w.is_empty())
                .ok_or_else(|| CoreError::ParseAt {
                    path: label.to_string(),
                    line: idx + 1,
                    msg: "missing word".into(),
                })?;
            let values: Vec<f32> = parts
                .map(|v| {
                    v.parse::<f32>().map_err(|_| CoreError::ParseAt {
                        path: label.to_string(),
                        line: idx + 1,
                        msg: format!("bad float '{v}'"),
                    })
                })
                .collect::<Result<_>>()?;
            match dim {
                None => {
                    if values.is_empty() {
                        return Err(CoreError::ParseAt {
                            path: label.to_string(),
                            line: idx + 1,
                            msg: "vector has zero dimensions".into(),
                        });
                    }
                    dim = Some(values.len());
                }
                Some(d) if d != values.len() => {
                    return Err(CoreError::ParseAt {
                        path: label.to_string(),
                        line: idx + 1,
                        msg: format!("expected {d} dimensions, got {}", values.len()),
                    });
                }
                _ => {}
            }
            if vocab.contains_key(word) {
                log::warn!("{label}:{}: duplicate word '{word}' ignored", idx + 1);
                continue;
            }
            vocab.insert(word.to_string(), rows.len());
            rows.push((word.to_string(), values));
        }
        let dim = dim.ok_or_else(|| CoreError::EmptyInput("embedding file has no rows".into()))?;

        let unk_index = match vocab.get(UNK_WORD) {
            Some(&i) => i,
            None => {
                let mut mean = vec![0.0f32; dim];
                for (_, row) in &rows {
                    for (m, v) in mean.iter_mut().zip(row) {
                        *m += v;
                    }
                }
                let n = rows.len() as f32;
                mean.iter_mut().for_each(|m| *m /= n);
                vocab.insert(UNK_WORD.to_string(), rows.len());
                rows.push((UNK_WORD.to_string(), mean));
                rows.len() - 1
            }
        };

        let mut matrix = Vec::with_capacity(rows.len() * dim);
        for (_, row) in &rows {
            matrix.extend_from_slice(row);
        }
        Ok(EmbeddingTable {
            dim,
            vocab,
            matrix,
            unk_index,
        })
    }

    /// Deterministic random table over a vocabulary, for corpora without
    /// pretrained vectors. Rows are uniform with variance ~1/dim so dot
    /// products stay O(1).
    pub fn random<I, W>(words: I, dim: usize, seed: u64) -> EmbeddingTable
    where
        I: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        let mut uniq: BTreeMap<String, ()> = BTreeMap::new();
        for w in words {
            uniq.insert(w.as_ref().to_lowercase(), ());
        }
        uniq.insert(UNK_WORD.to_string(), ());
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let bound = (3.0 / dim as f64).sqrt();
        let mut vocab = BTreeMap::new();
        let mut matrix = Vec::with_capacity(uniq.len() * dim);
        for (i, (word, _)) in uniq.into_iter().enumerate() {
            vocab.insert(word, i);
            for _ in 0..dim {
                matrix.push(rng.gen_range(-bound..bound) as f32);
            }
        }
        let unk_index = vocab[UNK_WORD];
        EmbeddingTable {
            dim,
            vocab,
            matrix,
            unk_index,
        }
    }

    /// Write the same text format back out; floats use the shortest
    /// round-trip representation so save/load is value-exact.
    pub fn save_text(&self, path: &Path) -> Result<()> {
        let mut by_index: Vec<(&str, usize)> =
            self.vocab.iter().map(|(w, i)| (w.as_str(), *i)).collect();
        by_index.sort_by_key(|(_, i)| *i);
        let mut out = String::new();
        for (word, i) in by_index {
            out.push_str(word);
            for v in self.row(i) {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }
}
