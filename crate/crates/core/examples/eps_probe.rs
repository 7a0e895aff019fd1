// probe different FD steps on the full reader loss
use tqr_core::nn::gradcheck::gradient_check;
use tqr_core::nn::tape::Graph;
use tqr_core::reader::{forward, example_loss, prepare_tokens, EmbeddingTable, FeatureMask, ModelParams, ReaderConfig};
use tqr_core::text::{annotate, apply_tfidf, DfTable};

fn main() {
    let config = ReaderConfig { embedding_dim: 6, hidden_size: 4, max_span_len: 15, dropout: 0.0 };
    let table = EmbeddingTable::random(["the","war","began","in","1917","when","did","start","?"], 6, 21);
    let df = DfTable::build([annotate("the war began in 1917").as_slice()]);
    let mut p_tokens = annotate("the war began in 1917");
    apply_tfidf(&mut p_tokens, &df).unwrap();
    let q_tokens = annotate("when did start");
    let ex = prepare_tokens(&p_tokens, &q_tokens, 4, 4, &table, &FeatureMask::full()).unwrap();
    let params = tqr_core::reader::init_params(&config, 77).unwrap().to_f64();

    for eps in [1e-4, 2e-4, 3e-4, 5e-4, 1e-3] {
        let mut store = params.store.clone();
        let report = gradient_check(|s, acc| {
            let probe = ModelParams { store: s.clone(), config };
            let mut g = Graph::<f64>::new();
            let fwd = forward(&mut g, &probe, &ex, None)?;
            let loss = example_loss(&mut g, &fwd, ex.gold_start, ex.gold_end)?;
            if acc { g.backward(loss, 1.0); g.accumulate_into(s); }
            Ok(g.value(loss).item())
        }, &mut store, eps).unwrap();
        println!("eps={eps:.0e}: max_rel={:.3e} at {}[{}] (a={:.3e}, f={:.3e})",
            report.max_rel_err, report.worst_param, report.worst_index, report.analytic, report.numeric);
    }
}
