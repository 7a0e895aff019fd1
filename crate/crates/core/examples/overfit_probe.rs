// Scratch probe for tuning the overfit configuration. Not part of the
// test suite; run with `cargo run -p tqr-core --example overfit_probe --release`.

use std::time::Instant;
use tqr_core::corpus::{generate_synthetic, split_dataset, Dataset};
use tqr_core::evaluation::evaluate;
use tqr_core::reader::{DecodeMode, EmbeddingTable};
use tqr_core::training::{train, TrainConfig};

fn main() {
    let ds = Dataset::from_records(generate_synthetic(20, 7), "synthetic").unwrap();
    println!("examples: {}", ds.examples.len());
    let (split, _) = split_dataset(&ds, 7).unwrap();
    println!(
        "train/dev/test examples: {}/{}/{}",
        split.train.len(),
        split.dev.len(),
        split.test.len()
    );
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

    for (dim, hidden, lr, epochs) in [
        (24usize, 24usize, 1e-3f64, 200usize),
        (16, 16, 2e-3, 200),
        (32, 32, 1e-3, 200),
    ] {
        let table = EmbeddingTable::random(vocab.clone(), dim, 7);
        let cfg = TrainConfig {
            epochs,
            batch_size: 8,
            seed: 7,
            learning_rate: lr,
            hidden_size: hidden,
            embedding_dim: dim,
            ..TrainConfig::default()
        };
        let t0 = Instant::now();
        let out = train(&split, &table, &cfg, None).unwrap();
        let secs = t0.elapsed().as_secs_f64();
        let df = &out.df_table;
        let em = evaluate(
            &split.train,
            &out.final_params,
            &table,
            df,
            &cfg.feature_mask,
            DecodeMode::RawArgmax,
        )
        .unwrap();
        // find the first epoch where train loss is tiny
        let early = out
            .log
            .iter()
            .find(|l| l.train_loss < 0.05)
            .map(|l| l.epoch);
        println!(
            "dim={dim} h={hidden} lr={lr} epochs={epochs}: {secs:.1}s train_EM={:.1} last_loss={:.4} loss<0.05@{early:?}",
            em.exact_match,
            out.log.last().unwrap().train_loss
        );
    }
}
