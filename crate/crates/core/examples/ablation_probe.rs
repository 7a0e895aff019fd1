// Scratch probe for the ablation budget. Run with
// `cargo run -p tqr-core --example ablation_probe --release`.

use std::time::Instant;
use tqr_core::corpus::{generate_synthetic, split_dataset, Dataset};
use tqr_core::evaluation::{evaluate, run_ablation, table3_specs};
use tqr_core::reader::{DecodeMode, EmbeddingTable};
use tqr_core::training::TrainConfig;

fn main() {
    let ds = Dataset::from_records(generate_synthetic(20, 7), "synthetic").unwrap();
    let (split, _) = split_dataset(&ds, 7).unwrap();
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
    let table = EmbeddingTable::random(vocab, 16, 7);
    let cfg = TrainConfig {
        epochs: 60,
        batch_size: 8,
        seed: 7,
        learning_rate: 2e-3,
        hidden_size: 16,
        embedding_dim: 16,
        ..TrainConfig::default()
    };
    let t0 = Instant::now();
    let runs = run_ablation(&split, &table, &cfg, &table3_specs()).unwrap();
    println!("10 runs in {:.1}s", t0.elapsed().as_secs_f64());
    for run in &runs {
        let train_em = evaluate(
            &split.train,
            run.output.selected_params(),
            &table,
            &run.output.df_table,
            &run.spec.mask,
            DecodeMode::RawArgmax,
        )
        .unwrap();
        println!(
            "{:<28} dev_EM={:>5.1} train_EM={:>5.1}",
            run.spec.name, run.report.exact_match, train_em.exact_match
        );
    }
}
