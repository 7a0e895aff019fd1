//! Flat key=value configuration files. Every key has an explicit
//! default, dumpable via `tqr print-config`; unknown keys are errors that
//! name the key.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use tqr_core::reader::FeatureMask;
use tqr_core::training::TrainConfig;
use tqr_core::CoreError;

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub train: TrainConfig,
    /// path to a pretrained embedding text file; empty means a random
    /// table derived from the corpus vocabulary
    pub embeddings: Option<PathBuf>,
}

impl Default for CliConfig {
    fn default() -> Self {
        CliConfig {
            train: TrainConfig::default(),
            embeddings: None,
        }
    }
}

impl CliConfig {
    pub fn load(path: &Path) -> anyhow::Result<CliConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        parse_config(&text).map_err(Into::into)
    }
}

pub fn parse_config(text: &str) -> Result<CliConfig, CoreError> {
    let mut cfg = CliConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CoreError::ParseAt {
            path: "config".into(),
            line: idx + 1,
            msg: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| CoreError::ParseAt {
            path: "config".into(),
            line: idx + 1,
            msg: format!("bad {what} value '{value}' for key '{key}'"),
        };
        let t = &mut cfg.train;
        match key {
            "epochs" => t.epochs = value.parse().map_err(|_| bad("integer"))?,
            "batch_size" => t.batch_size = value.parse().map_err(|_| bad("integer"))?,
            "seed" => t.seed = value.parse().map_err(|_| bad("integer"))?,
            "learning_rate" => t.learning_rate = value.parse().map_err(|_| bad("float"))?,
            "hidden_size" => t.hidden_size = value.parse().map_err(|_| bad("integer"))?,
            "embedding_dim" => t.embedding_dim = value.parse().map_err(|_| bad("integer"))?,
            "max_span_len" => t.max_span_len = value.parse().map_err(|_| bad("integer"))?,
            "dropout" => t.dropout = value.parse().map_err(|_| bad("float"))?,
            "gradient_clip_norm" => {
                t.gradient_clip_norm = if value == "none" {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad("float"))?)
                }
            }
            "checkpoint_every" => t.checkpoint_every = value.parse().map_err(|_| bad("integer"))?,
            "use_exact_match" => t.feature_mask.use_exact_match = parse_bool(value).ok_or_else(|| bad("boolean"))?,
            "use_pos" => t.feature_mask.use_pos = parse_bool(value).ok_or_else(|| bad("boolean"))?,
            "use_ner" => t.feature_mask.use_ner = parse_bool(value).ok_or_else(|| bad("boolean"))?,
            "use_tfidf" => t.feature_mask.use_tfidf = parse_bool(value).ok_or_else(|| bad("boolean"))?,
            "use_aligned" => t.feature_mask.use_aligned = parse_bool(value).ok_or_else(|| bad("boolean"))?,
            "embeddings" => {
                cfg.embeddings = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            _ => return Err(CoreError::UnknownConfigKey(key.to_string())),
        }
    }
    Ok(cfg)
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" | "on" => Some(true),
        "false" | "0" | "off" => Some(false),
        _ => None,
    }
}

pub fn render_config(cfg: &CliConfig) -> String {
    let t = &cfg.train;
    let m: &FeatureMask = &t.feature_mask;
    let mut out = String::new();
    let _ = writeln!(out, "epochs = {}", t.epochs);
    let _ = writeln!(out, "batch_size = {}", t.batch_size);
    let _ = writeln!(out, "seed = {}", t.seed);
    let _ = writeln!(out, "learning_rate = {}", t.learning_rate);
    let _ = writeln!(out, "hidden_size = {}", t.hidden_size);
    let _ = writeln!(out, "embedding_dim = {}", t.embedding_dim);
    let _ = writeln!(out, "max_span_len = {}", t.max_span_len);
    let _ = writeln!(out, "dropout = {}", t.dropout);
    let _ = writeln!(
        out,
        "gradient_clip_norm = {}",
        t.gradient_clip_norm.map_or("none".to_string(), |v| v.to_string())
    );
    let _ = writeln!(out, "checkpoint_every = {}", t.checkpoint_every);
    let _ = writeln!(out, "use_exact_match = {}", m.use_exact_match);
    let _ = writeln!(out, "use_pos = {}", m.use_pos);
    let _ = writeln!(out, "use_ner = {}", m.use_ner);
    let _ = writeln!(out, "use_tfidf = {}", m.use_tfidf);
    let _ = writeln!(out, "use_aligned = {}", m.use_aligned);
    let _ = writeln!(
        out,
        "embeddings = {}",
        cfg.embeddings.as_ref().map_or(String::new(), |p| p.display().to_string())
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = CliConfig::default();
        let parsed = parse_config(&render_config(&cfg)).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("epochz = 3\n").unwrap_err();
        assert!(err.to_string().contains("epochz"), "{err}");
    }

    #[test]
    fn overrides_apply() {
        let cfg = parse_config("epochs = 5\nuse_ner = false\ngradient_clip_norm = none\n").unwrap();
        assert_eq!(cfg.train.epochs, 5);
        assert!(!cfg.train.feature_mask.use_ner);
        assert_eq!(cfg.train.gradient_clip_norm, None);
    }
}
