//! Metrics (start accuracy, end accuracy, their mean, exact match) and
//! the feature-ablation harness.

use crate::corpus::{DatasetSplit, QAExample};
use crate::error::{CoreError, Result};
use crate::reader::{
    decode_span, features, predict_distributions, DecodeMode, EmbeddingTable, FeatureMask,
    ModelParams, SpanPrediction,
};
use crate::text::DfTable;
use crate::training::{train, EpochLog, TrainConfig, TrainOutput};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

/// Percentages over an evaluation run. The mean is exactly the average of
/// the start and end accuracies; exact match can never exceed either.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub start_acc: f64,
    pub end_acc: f64,
    pub mean: f64,
    pub exact_match: f64,
    pub n_examples: usize,
}

impl MetricsReport {
    pub fn from_counts(n: usize, starts: usize, ends: usize, exacts: usize) -> Result<Self> {
        if n == 0 {
            return Err(CoreError::EmptyInput("evaluation over zero examples".into()));
        }
        let pct = |k: usize| k as f64 * 100.0 / n as f64;
        let start_acc = pct(starts);
        let end_acc = pct(ends);
        Ok(MetricsReport {
            start_acc,
            end_acc,
            mean: (start_acc + end_acc) / 2.0,
            exact_match: pct(exacts),
            n_examples: n,
        })
    }

    pub fn from_predictions(
        preds: &[(usize, usize)],
        golds: &[(usize, usize)],
    ) -> Result<Self> {
        debug_assert_eq!(preds.len(), golds.len());
        let mut starts = 0;
        let mut ends = 0;
        let mut exacts = 0;
        for ((ps, pe), (gs, ge)) in preds.iter().zip(golds) {
            let s_ok = ps == gs;
            let e_ok = pe == ge;
            starts += s_ok as usize;
            ends += e_ok as usize;
            exacts += (s_ok && e_ok) as usize;
        }
        Self::from_counts(preds.len(), starts, ends, exacts)
    }

    pub fn table_row(&self, label: &str) -> String {
        format!(
            "{label:<28} {:>9.1} {:>9.1} {:>9.1} {:>11.1} {:>7}",
            self.start_acc, self.end_acc, self.mean, self.exact_match, self.n_examples
        )
    }

    pub fn table_header(label_title: &str) -> String {
        format!(
            "{label_title:<28} {:>9} {:>9} {:>9} {:>11} {:>7}",
            "start_acc", "end_acc", "mean", "exact_match", "n"
        )
    }
}

/// Predict spans for every example and score them against gold indices.
pub fn evaluate(
    examples: &[QAExample],
    params: &ModelParams<f32>,
    table: &EmbeddingTable,
    df: &DfTable,
    mask: &FeatureMask,
    mode: DecodeMode,
) -> Result<MetricsReport> {
    let preds = predict_all(examples, params, table, df, mask, mode)?;
    let pred_pairs: Vec<(usize, usize)> = preds.iter().map(|p| (p.start, p.end)).collect();
    let golds: Vec<(usize, usize)> = examples
        .iter()
        .map(|e| (e.answer_start, e.answer_end))
        .collect();
    MetricsReport::from_predictions(&pred_pairs, &golds)
}

/// Per-example predictions, parallel over a read-only parameter snapshot.
pub fn predict_all(
    examples: &[QAExample],
    params: &ModelParams<f32>,
    table: &EmbeddingTable,
    df: &DfTable,
    mask: &FeatureMask,
    mode: DecodeMode,
) -> Result<Vec<SpanPrediction>> {
    if examples.is_empty() {
        return Err(CoreError::EmptyInput("evaluation over zero examples".into()));
    }
    examples
        .par_iter()
        .map(|e| {
            let prepared = features::prepare_with_tfidf(e, table, df, mask)?;
            let (p_start, p_end) = predict_distributions(params, &prepared)?;
            Ok(decode_span(&p_start, &p_end, mode, params.config.max_span_len))
        })
        .collect()
}

/// A named feature configuration for one ablation run.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationSpec {
    pub name: String,
    pub mask: FeatureMask,
}

impl AblationSpec {
    pub fn new(name: &str, mask: FeatureMask) -> Self {
        AblationSpec {
            name: name.to_string(),
            mask,
        }
    }
}

/// The ten preset rows of the feature-ablation table: the full model,
/// each feature group removed alone, the token-feature group as a whole,
/// and the three pairwise removals.
pub fn table3_specs() -> Vec<AblationSpec> {
    let full = FeatureMask::full();
    vec![
        AblationSpec::new("full", full),
        AblationSpec::new("no_ner", FeatureMask { use_ner: false, ..full }),
        AblationSpec::new("no_pos", FeatureMask { use_pos: false, ..full }),
        AblationSpec::new("no_tfidf", FeatureMask { use_tfidf: false, ..full }),
        AblationSpec::new(
            "no_token_features",
            FeatureMask {
                use_pos: false,
                use_ner: false,
                use_tfidf: false,
                ..full
            },
        ),
        AblationSpec::new("no_aligned", FeatureMask { use_aligned: false, ..full }),
        AblationSpec::new("no_exact_match", FeatureMask { use_exact_match: false, ..full }),
        AblationSpec::new(
            "no_aligned_no_exact_match",
            FeatureMask {
                use_aligned: false,
                use_exact_match: false,
                ..full
            },
        ),
        AblationSpec::new(
            "no_aligned_no_ner",
            FeatureMask {
                use_aligned: false,
                use_ner: false,
                ..full
            },
        ),
        AblationSpec::new(
            "no_exact_match_no_ner",
            FeatureMask {
                use_exact_match: false,
                use_ner: false,
                ..full
            },
        ),
    ]
}

#[derive(Debug)]
pub struct AblationRun {
    pub spec: AblationSpec,
    /// dev-split metrics of the selected parameters (raw decoding); the
    /// f-measure of the ablation table is the exact-match column
    pub report: MetricsReport,
    pub log: Vec<EpochLog>,
    pub output: TrainOutput,
}

/// One full train+evaluate cycle per spec with identical seed and data.
pub fn run_ablation(
    split: &DatasetSplit,
    table: &EmbeddingTable,
    base_config: &TrainConfig,
    specs: &[AblationSpec],
) -> Result<Vec<AblationRun>> {
    if specs.is_empty() {
        return Err(CoreError::EmptyInput("no ablation specs".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for s in specs {
        if !seen.insert(s.name.clone()) {
            return Err(CoreError::Validation(format!(
                "duplicate ablation spec name '{}'",
                s.name
            )));
        }
    }
    let mut runs = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut config = base_config.clone();
        config.feature_mask = spec.mask;
        let output = train(split, table, &config, None)?;
        let eval_split = if split.dev.is_empty() { &split.train } else { &split.dev };
        let report = evaluate(
            eval_split,
            output.selected_params(),
            table,
            &output.df_table,
            &spec.mask,
            DecodeMode::RawArgmax,
        )?;
        runs.push(AblationRun {
            spec: spec.clone(),
            report,
            log: output.log.clone(),
            output,
        });
    }
    Ok(runs)
}

/// Aligned plain-text ablation table.
pub fn ablation_table_text(runs: &[AblationRun]) -> String {
    let mut out = MetricsReport::table_header("features");
    out.push('\n');
    for run in runs {
        out.push_str(&run.report.table_row(&run.spec.name));
        out.push('\n');
    }
    out
}

/// Machine-readable CSV: spec_name, start_acc, end_acc, mean,
/// exact_match, n.
pub fn ablation_csv(runs: &[AblationRun]) -> String {
    let mut out = String::from("spec_name,start_acc,end_acc,mean,exact_match,n\n");
    for run in runs {
        let m = &run.report;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            run.spec.name, m.start_acc, m.end_acc, m.mean, m.exact_match, m.n_examples
        );
    }
    out
}
