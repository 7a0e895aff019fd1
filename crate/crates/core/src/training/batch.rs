//! Batches of prepared examples. Feature tensors are padded to the batch
//! maximum with masks marking exactly the real-token positions; padded
//! positions never enter any softmax support, so loss is independent of
//! pad width.

use crate::error::{CoreError, Result};
use crate::reader::PreparedExample;

#[derive(Debug, Clone)]
pub struct Batch {
    pub examples: Vec<PreparedExample>,
    /// padded paragraph width (>= longest paragraph in the batch)
    pub pad_para_len: usize,
    /// padded question width
    pub pad_question_len: usize,
}

/// Padded tensors and their masks, the on-the-wire view of a batch.
#[derive(Debug, Clone)]
pub struct PaddedView {
    /// [batch][pad_para_len][feat] paragraph static+embedding rows
    pub para_rows: Vec<Vec<Vec<f32>>>,
    /// [batch][pad_para_len] true at real tokens
    pub para_mask: Vec<Vec<bool>>,
    /// [batch][pad_question_len][dim]
    pub question_rows: Vec<Vec<Vec<f32>>>,
    pub question_mask: Vec<Vec<bool>>,
    pub gold_start: Vec<usize>,
    pub gold_end: Vec<usize>,
}

impl Batch {
    pub fn new(examples: Vec<PreparedExample>) -> Result<Batch> {
        if examples.is_empty() {
            return Err(CoreError::EmptyInput("empty batch".into()));
        }
        let pad_para_len = examples.iter().map(|e| e.para_len()).max().unwrap_or(0);
        let pad_question_len = examples.iter().map(|e| e.question_len()).max().unwrap_or(0);
        let batch = Batch {
            examples,
            pad_para_len,
            pad_question_len,
        };
        batch.validate()?;
        Ok(batch)
    }

    /// Same batch with extra pad columns; loss must not change.
    pub fn with_extra_padding(mut self, extra: usize) -> Batch {
        self.pad_para_len += extra;
        self.pad_question_len += extra;
        self
    }

    fn validate(&self) -> Result<()> {
        for (i, e) in self.examples.iter().enumerate() {
            if e.gold_start > e.gold_end || e.gold_end >= e.para_len() {
                return Err(CoreError::Validation(format!(
                    "batch item {i}: gold span {}..={} outside true length {}",
                    e.gold_start,
                    e.gold_end,
                    e.para_len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Materialize padded tensors plus masks.
    pub fn padded(&self) -> PaddedView {
        let feat_dim = self.examples[0].embedding_dim
            + self.examples[0].static_feats.first().map_or(0, |f| f.len());
        let dim = self.examples[0].embedding_dim;
        let mut view = PaddedView {
            para_rows: Vec::with_capacity(self.len()),
            para_mask: Vec::with_capacity(self.len()),
            question_rows: Vec::with_capacity(self.len()),
            question_mask: Vec::with_capacity(self.len()),
            gold_start: Vec::with_capacity(self.len()),
            gold_end: Vec::with_capacity(self.len()),
        };
        for e in &self.examples {
            let mut rows = Vec::with_capacity(self.pad_para_len);
            let mut mask = Vec::with_capacity(self.pad_para_len);
            for i in 0..self.pad_para_len {
                if i < e.para_len() {
                    let mut row = e.para_embeds[i].clone();
                    row.extend_from_slice(&e.static_feats[i]);
                    rows.push(row);
                    mask.push(true);
                } else {
                    rows.push(vec![0.0; feat_dim]);
                    mask.push(false);
                }
            }
            view.para_rows.push(rows);
            view.para_mask.push(mask);

            let mut q_rows = Vec::with_capacity(self.pad_question_len);
            let mut q_mask = Vec::with_capacity(self.pad_question_len);
            for j in 0..self.pad_question_len {
                if j < e.question_len() {
                    q_rows.push(e.q_embeds[j].clone());
                    q_mask.push(true);
                } else {
                    q_rows.push(vec![0.0; dim]);
                    q_mask.push(false);
                }
            }
            view.question_rows.push(q_rows);
            view.question_mask.push(q_mask);
            view.gold_start.push(e.gold_start);
            view.gold_end.push(e.gold_end);
        }
        view
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reader::{prepare_tokens, EmbeddingTable, FeatureMask};
    use crate::text::annotate;

    fn example(text: &str, q: &str, gold: (usize, usize)) -> PreparedExample {
        let table = EmbeddingTable::random(["a"], 4, 1);
        prepare_tokens(
            &annotate(text),
            &annotate(q),
            gold.0,
            gold.1,
            &table,
            &FeatureMask::full(),
        )
        .unwrap()
    }

    #[test]
    fn masks_mark_exactly_real_positions() {
        let batch = Batch::new(vec![
            example("one two three", "why ?", (1, 2)),
            example("one", "why ?", (0, 0)),
        ])
        .unwrap();
        let view = batch.padded();
        assert_eq!(view.para_mask[0], [true, true, true]);
        assert_eq!(view.para_mask[1], [true, false, false]);
        assert_eq!(view.para_rows[1][1], vec![0.0; view.para_rows[1][1].len()]);
    }

    #[test]
    fn gold_outside_true_length_rejected() {
        let mut e = example("one two", "why ?", (0, 1));
        e.gold_end = 5;
        assert!(Batch::new(vec![e]).is_err());
    }
}
