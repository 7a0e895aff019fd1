//! The file bundle a training run leaves behind and the loaders the
//! other commands use to pick it up again.

use crate::config::{parse_config, render_config, CliConfig};
use anyhow::{anyhow, Context, Result};
use std::path::{Path, PathBuf};
use tqr_core::corpus::{Dataset, DatasetSplit};
use tqr_core::nn::load_checkpoint;
use tqr_core::reader::{EmbeddingTable, ModelParams};
use tqr_core::text::DfTable;

pub const CHECKPOINT_FILE: &str = "checkpoint.tqr";
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const CONFIG_SNAPSHOT_FILE: &str = "config.snapshot";
pub const DF_TABLE_FILE: &str = "df_table.tsv";
pub const LOSS_LOG_FILE: &str = "loss.csv";
pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";
pub const SPLIT_MANIFEST_FILE: &str = "split_manifest.json";

/// Everything needed to run the model outside training.
pub struct ModelBundle {
    pub params: ModelParams<f32>,
    pub table: EmbeddingTable,
    pub df: DfTable,
    pub config: CliConfig,
}

/// Load a checkpoint plus its sibling artifacts (config snapshot,
/// embeddings, df table) from the checkpoint's directory.
pub fn load_bundle(ckpt: &Path) -> Result<ModelBundle> {
    let dir = ckpt
        .parent()
        .ok_or_else(|| anyhow!("checkpoint path has no parent directory"))?;
    let store =
        load_checkpoint(ckpt).with_context(|| format!("loading checkpoint {}", ckpt.display()))?;

    let snapshot = dir.join(CONFIG_SNAPSHOT_FILE);
    let config = if snapshot.exists() {
        parse_config(&std::fs::read_to_string(&snapshot)?)?
    } else {
        return Err(anyhow!(
            "missing config snapshot {} next to the checkpoint",
            snapshot.display()
        ));
    };

    let emb_path = dir.join(EMBEDDINGS_FILE);
    let table = EmbeddingTable::load_text(&emb_path)
        .with_context(|| format!("loading embeddings {}", emb_path.display()))?;

    let df_path = dir.join(DF_TABLE_FILE);
    let df = if df_path.exists() {
        DfTable::load_tsv(&df_path)?
    } else {
        log::warn!(
            "no {} next to checkpoint; TF-IDF features default to 0",
            DF_TABLE_FILE
        );
        DfTable::neutral()
    };

    Ok(ModelBundle {
        params: ModelParams {
            store,
            config: config.train.reader_config(),
        },
        table,
        df,
        config,
    })
}

pub fn write_config_snapshot(dir: &Path, cfg: &CliConfig) -> Result<()> {
    std::fs::write(dir.join(CONFIG_SNAPSHOT_FILE), render_config(cfg))?;
    Ok(())
}

/// Load the three split files out of a prepared data directory.
pub fn load_split(data_dir: &Path) -> Result<(DatasetSplit, [PathBuf; 3])> {
    let paths = [
        data_dir.join("train.jsonl"),
        data_dir.join("dev.jsonl"),
        data_dir.join("test.jsonl"),
    ];
    for p in &paths {
        if !p.exists() {
            return Err(anyhow!("missing dataset file {}", p.display()));
        }
    }
    let train = Dataset::load(&paths[0])?;
    let dev = Dataset::load(&paths[1])?;
    let test = Dataset::load(&paths[2])?;
    let seed = read_split_seed(data_dir).unwrap_or(0);
    Ok((
        DatasetSplit {
            train: train.examples,
            dev: dev.examples,
            test: test.examples,
            seed,
        },
        paths,
    ))
}

fn read_split_seed(data_dir: &Path) -> Option<u64> {
    let text = std::fs::read_to_string(data_dir.join(SPLIT_MANIFEST_FILE)).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    value.get("seed")?.as_u64()
}

/// Vocabulary of every token in the split, for building a random table.
pub fn split_vocab(split: &DatasetSplit) -> Vec<String> {
    let mut words = Vec::new();
    for part in [&split.train, &split.dev, &split.test] {
        for e in part {
            words.extend(e.paragraph.tokens.iter().map(|t| t.lower.clone()));
            words.extend(e.question_tokens.iter().map(|t| t.lower.clone()));
        }
    }
    words
}
