//! Seeded training loop: per-epoch reshuffle, summed start+end
//! cross-entropy averaged over the batch, Adam updates, per-epoch dev
//! metrics, and model selection by best dev exact match.

use crate::corpus::DatasetSplit;
use crate::error::{CoreError, Result};
use crate::evaluation::{evaluate, MetricsReport};
use crate::nn::checkpoint::save_checkpoint;
use crate::nn::store::OptimizerConfig;
use crate::nn::tape::Graph;
use crate::reader::{
    self, DropoutPlan, EmbeddingTable, FeatureMask, ModelParams, PreparedExample, ReaderConfig,
};
use crate::text::DfTable;
use crate::training::batch::Batch;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub hidden_size: usize,
    pub embedding_dim: usize,
    pub max_span_len: usize,
    pub dropout: f64,
    pub gradient_clip_norm: Option<f64>,
    /// write a checkpoint every k epochs; 0 disables
    pub checkpoint_every: usize,
    pub feature_mask: FeatureMask,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 32,
            seed: 13,
            learning_rate: 1e-3,
            hidden_size: 128,
            embedding_dim: 300,
            max_span_len: 15,
            dropout: 0.0,
            gradient_clip_norm: Some(10.0),
            checkpoint_every: 0,
            feature_mask: FeatureMask::full(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 || self.batch_size < 1 {
            return Err(CoreError::Validation(format!(
                "epochs and batch_size must be >= 1, got {} and {}",
                self.epochs, self.batch_size
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(CoreError::Validation(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    pub fn reader_config(&self) -> ReaderConfig {
        ReaderConfig {
            embedding_dim: self.embedding_dim,
            hidden_size: self.hidden_size,
            max_span_len: self.max_span_len,
            dropout: self.dropout,
        }
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            learning_rate: self.learning_rate,
            gradient_clip_norm: self.gradient_clip_norm,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev: Option<MetricsReport>,
}

#[derive(Debug)]
pub struct TrainOutput {
    pub final_params: ModelParams<f32>,
    /// best dev exact-match epoch and its parameters, when dev is non-empty
    pub best: Option<(usize, ModelParams<f32>)>,
    pub log: Vec<EpochLog>,
    /// document-frequency table built over the training split
    pub df_table: DfTable,
}

impl TrainOutput {
    /// The params the contract selects: best dev epoch, else final.
    pub fn selected_params(&self) -> &ModelParams<f32> {
        match &self.best {
            Some((_, p)) => p,
            None => &self.final_params,
        }
    }
}

/// CSV columns: epoch, train_loss, dev_start_acc, dev_end_acc, dev_mean,
/// dev_exact. Dev columns are empty when there is no dev split.
pub fn loss_log_csv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch,train_loss,dev_start_acc,dev_end_acc,dev_mean,dev_exact\n");
    for row in log {
        match &row.dev {
            Some(m) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    row.epoch, row.train_loss, m.start_acc, m.end_acc, m.mean, m.exact_match
                );
            }
            None => {
                let _ = writeln!(out, "{},{},,,,", row.epoch, row.train_loss);
            }
        }
    }
    out
}

/// Build the df table from the training split's paragraphs.
pub fn train_df_table(split: &DatasetSplit) -> DfTable {
    let mut seen = std::collections::BTreeMap::new();
    for e in &split.train {
        seen.entry(e.paragraph.key())
            .or_insert_with(|| e.paragraph.tokens.clone());
    }
    DfTable::build(seen.values().map(|t| t.as_slice()))
}

fn prepare_all(
    examples: &[crate::corpus::QAExample],
    table: &EmbeddingTable,
    df: &DfTable,
    mask: &FeatureMask,
) -> Result<Vec<PreparedExample>> {
    examples
        .iter()
        .map(|e| reader::features::prepare_with_tfidf(e, table, df, mask))
        .collect()
}

/// Mean over the batch of summed start+end cross-entropy. Padded
/// positions are outside every softmax's support by construction.
pub fn compute_loss(batch: &Batch, params: &ModelParams<f32>) -> Result<f64> {
    let (_, loss) = batch_loss_graph(batch, params, None)?;
    Ok(loss)
}

fn batch_loss_graph(
    batch: &Batch,
    params: &ModelParams<f32>,
    dropout: Option<(&mut ChaCha20Rng, f64)>,
) -> Result<(Graph<f32>, f64)> {
    let mut g = Graph::new();
    let mut losses = Vec::with_capacity(batch.len());
    let mut plans: Vec<Option<DropoutPlan>> = Vec::with_capacity(batch.len());
    if let Some((rng, rate)) = dropout {
        for ex in &batch.examples {
            plans.push(DropoutPlan::sample(
                rng,
                rate,
                ex.para_len(),
                ex.question_len(),
                reader::feature_width(ex.embedding_dim),
                ex.embedding_dim,
            ));
        }
    } else {
        plans.resize_with(batch.len(), || None);
    }
    for (ex, plan) in batch.examples.iter().zip(&plans) {
        let fwd = reader::forward(&mut g, params, ex, plan.as_ref())?;
        losses.push(reader::example_loss(&mut g, &fwd, ex.gold_start, ex.gold_end)?);
    }
    let mean = g.mean(losses)?;
    let value = g.value(mean).item() as f64;
    g.backward(mean, 1.0);
    Ok((g, value))
}

/// Full training run. Deterministic given (split, table, config).
pub fn train(
    split: &DatasetSplit,
    table: &EmbeddingTable,
    config: &TrainConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<TrainOutput> {
    config.validate()?;
    if split.train.is_empty() {
        return Err(CoreError::EmptyInput("empty training split".into()));
    }

    let df = train_df_table(split);
    let prepared = prepare_all(&split.train, table, &df, &config.feature_mask)?;

    let mut params = crate::reader::init_params(&config.reader_config(), config.seed)?;
    let opt = config.optimizer_config();
    // separate stream from parameter init
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed.wrapping_add(0x9E37_79B9));

    let mut log = Vec::with_capacity(config.epochs);
    let mut best: Option<(usize, f64, ModelParams<f32>)> = None;

    for epoch in 1..=config.epochs {
        let mut order: Vec<usize> = (0..prepared.len()).collect();
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0f64;
        for (step, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch = Batch::new(chunk.iter().map(|&i| prepared[i].clone()).collect())?;
            let dropout = if config.dropout > 0.0 {
                Some((&mut rng, config.dropout))
            } else {
                None
            };
            let (g, loss) = batch_loss_graph(&batch, &params, dropout)?;
            if !loss.is_finite() {
                return Err(CoreError::NumericAbort { epoch, step });
            }
            params.store.zero_grads();
            g.accumulate_into(&mut params.store);
            params.store.adam_step(&opt)?;
            loss_sum += loss * batch.len() as f64;
        }
        let train_loss = loss_sum / prepared.len() as f64;

        let dev = if split.dev.is_empty() {
            None
        } else {
            Some(evaluate(
                &split.dev,
                &params,
                table,
                &df,
                &config.feature_mask,
                crate::reader::DecodeMode::RawArgmax,
            )?)
        };
        if let Some(m) = &dev {
            let is_better = best
                .as_ref()
                .map_or(true, |(_, best_em, _)| m.exact_match > *best_em);
            if is_better {
                best = Some((epoch, m.exact_match, params.clone()));
            }
        }
        if config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0 {
            if let Some(dir) = checkpoint_dir {
                save_checkpoint(&params.store, &dir.join(format!("epoch-{epoch:04}.ckpt")))?;
            }
        }
        log.push(EpochLog {
            epoch,
            train_loss,
            dev,
        });
    }

    Ok(TrainOutput {
        final_params: params,
        best: best.map(|(e, _, p)| (e, p)),
        log,
        df_table: df,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic, split_dataset, Dataset};
    use crate::reader::prepare_tokens;
    use crate::text::annotate;

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 8,
            seed: 5,
            hidden_size: 6,
            embedding_dim: 8,
            ..TrainConfig::default()
        }
    }

    fn tiny_setup() -> (DatasetSplit, EmbeddingTable) {
        let ds = Dataset::from_records(generate_synthetic(12, 3), "synthetic").unwrap();
        let vocab: Vec<String> = ds
            .examples
            .iter()
            .flat_map(|e| {
                e.paragraph
                    .tokens
                    .iter()
                    .chain(e.question_tokens.iter())
                    .map(|t| t.lower.clone())
            })
            .collect();
        let table = EmbeddingTable::random(vocab, 8, 3);
        let (split, _) = split_dataset(&ds, 3).unwrap();
        (split, table)
    }

    #[test]
    fn uniform_model_loss_is_two_ln_m() {
        // Zeroed span matrices give uniform start/end over m=4.
        let table = EmbeddingTable::random(["a", "b", "c", "d", "why"], 4, 1);
        let mut params = crate::reader::init_params(
            &ReaderConfig {
                embedding_dim: 4,
                hidden_size: 2,
                max_span_len: 15,
                dropout: 0.0,
            },
            1,
        )
        .unwrap();
        params
            .store
            .get_mut(crate::reader::model::SPAN_START_W)
            .unwrap()
            .fill(0.0);
        params
            .store
            .get_mut(crate::reader::model::SPAN_END_W)
            .unwrap()
            .fill(0.0);
        let ex = prepare_tokens(
            &annotate("a b c d"),
            &annotate("why ?"),
            1,
            2,
            &table,
            &FeatureMask::full(),
        )
        .unwrap();
        let batch = Batch::new(vec![ex]).unwrap();
        let loss = compute_loss(&batch, &params).unwrap();
        let expect = 2.0 * (4.0f64).ln();
        assert!((loss - expect).abs() < 1e-5, "{loss} vs {expect}");
    }

    #[test]
    fn batch_loss_is_mean_of_singleton_losses() {
        let (split, table) = tiny_setup();
        let cfg = tiny_config();
        let df = train_df_table(&split);
        let params = crate::reader::init_params(&cfg.reader_config(), 1).unwrap();
        let a = reader::features::prepare_with_tfidf(&split.train[0], &table, &df, &cfg.feature_mask)
            .unwrap();
        let b = reader::features::prepare_with_tfidf(&split.train[1], &table, &df, &cfg.feature_mask)
            .unwrap();
        let la = compute_loss(&Batch::new(vec![a.clone()]).unwrap(), &params).unwrap();
        let lb = compute_loss(&Batch::new(vec![b.clone()]).unwrap(), &params).unwrap();
        let lab = compute_loss(&Batch::new(vec![a, b]).unwrap(), &params).unwrap();
        assert!((lab - (la + lb) / 2.0).abs() < 1e-6);
    }

    #[test]
    fn padding_does_not_change_loss() {
        let (split, table) = tiny_setup();
        let cfg = tiny_config();
        let df = train_df_table(&split);
        let params = crate::reader::init_params(&cfg.reader_config(), 2).unwrap();
        let prepared = prepare_all(&split.train[..4], &table, &df, &cfg.feature_mask).unwrap();
        let plain = Batch::new(prepared.clone()).unwrap();
        let padded = Batch::new(prepared).unwrap().with_extra_padding(7);
        let l1 = compute_loss(&plain, &params).unwrap();
        let l2 = compute_loss(&padded, &params).unwrap();
        assert!((l1 - l2).abs() < 1e-5);
        // masks still mark exactly the real positions
        let view = padded.padded();
        for (mask, ex) in view.para_mask.iter().zip(&padded.examples) {
            assert_eq!(mask.iter().filter(|x| **x).count(), ex.para_len());
        }
    }

    #[test]
    fn same_seed_same_loss_log() {
        let (split, table) = tiny_setup();
        let cfg = tiny_config();
        let out1 = train(&split, &table, &cfg, None).unwrap();
        let out2 = train(&split, &table, &cfg, None).unwrap();
        assert_eq!(loss_log_csv(&out1.log), loss_log_csv(&out2.log));
        // identical final parameters, bit for bit
        for (a, b) in out1.final_params.store.iter().zip(out2.final_params.store.iter()) {
            assert_eq!(a.value.data(), b.value.data(), "{}", a.name);
        }
    }

    #[test]
    fn empty_dev_split_still_completes() {
        let (mut split, table) = tiny_setup();
        split.dev.clear();
        let out = train(&split, &table, &tiny_config(), None).unwrap();
        assert!(out.log.iter().all(|l| l.dev.is_none()));
        assert!(out.best.is_none());
        let csv = loss_log_csv(&out.log);
        assert!(csv.lines().nth(1).unwrap().ends_with(",,,,"));
    }

    #[test]
    fn unit_distribution_gives_zero_loss_and_loss_is_nonnegative() {
        // m = 1 forces P_start = P_end = [1.0] exactly.
        let table = EmbeddingTable::random(["x", "why"], 4, 1);
        let params = crate::reader::init_params(
            &ReaderConfig {
                embedding_dim: 4,
                hidden_size: 2,
                max_span_len: 15,
                dropout: 0.0,
            },
            2,
        )
        .unwrap();
        let ex = prepare_tokens(
            &annotate("1917"),
            &annotate("when ?"),
            0,
            0,
            &table,
            &FeatureMask::full(),
        )
        .unwrap();
        let loss = compute_loss(&Batch::new(vec![ex]).unwrap(), &params).unwrap();
        assert_eq!(loss, 0.0);

        let (split, table) = tiny_setup();
        let cfg = tiny_config();
        let df = train_df_table(&split);
        let params = crate::reader::init_params(&cfg.reader_config(), 9).unwrap();
        for e in &split.train {
            let p = reader::features::prepare_with_tfidf(e, &table, &df, &cfg.feature_mask)
                .unwrap();
            let l = compute_loss(&Batch::new(vec![p]).unwrap(), &params).unwrap();
            assert!(l >= 0.0);
        }
    }

    #[test]
    fn checkpoint_round_trip_preserves_loss_and_every_epoch_writes() {
        let (split, table) = tiny_setup();
        let mut cfg = tiny_config();
        cfg.checkpoint_every = 1;
        let dir = tempfile::tempdir().unwrap();
        let out = train(&split, &table, &cfg, Some(dir.path())).unwrap();
        for epoch in 1..=cfg.epochs {
            assert!(dir.path().join(format!("epoch-{epoch:04}.ckpt")).exists());
        }

        let df = &out.df_table;
        let prepared: Vec<_> = split.train[..4]
            .iter()
            .map(|e| {
                reader::features::prepare_with_tfidf(e, &table, df, &cfg.feature_mask).unwrap()
            })
            .collect();
        let batch = Batch::new(prepared).unwrap();
        let before = compute_loss(&batch, &out.final_params).unwrap();

        let ckpt = dir.path().join("model.ckpt");
        crate::nn::save_checkpoint(&out.final_params.store, &ckpt).unwrap();
        let reloaded = ModelParams {
            store: crate::nn::load_checkpoint(&ckpt).unwrap(),
            config: cfg.reader_config(),
        };
        let after = compute_loss(&batch, &reloaded).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn loss_decreases_on_tiny_run() {
        let (split, table) = tiny_setup();
        let mut cfg = tiny_config();
        cfg.epochs = 12;
        let out = train(&split, &table, &cfg, None).unwrap();
        let first = out.log.first().unwrap().train_loss;
        let last = out.log.last().unwrap().train_loss;
        assert!(last < first, "loss went {first} -> {last}");
    }
}
