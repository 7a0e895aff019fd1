//! Subcommand implementations.

use crate::artifacts::{
    load_bundle, load_split, split_vocab, write_config_snapshot, CHECKPOINT_FILE, DF_TABLE_FILE,
    EMBEDDINGS_FILE, LOSS_LOG_FILE, RUN_MANIFEST_FILE, SPLIT_MANIFEST_FILE,
};
use crate::config::{render_config, CliConfig};
use crate::manifest::{hash_file, RunManifest};
use crate::specs::{specs_from_tsv, specs_to_tsv};
use anyhow::{anyhow, bail, Context, Result};
use std::path::{Path, PathBuf};
use tqr_core::corpus::{
    augment, generate_synthetic, parse_timex2, split_dataset, split_paragraphs, CorpusStats,
    Dataset, RawRecord,
};
use tqr_core::evaluation::{
    ablation_csv, ablation_table_text, evaluate, run_ablation, table3_specs, MetricsReport,
};
use tqr_core::nn::save_checkpoint;
use tqr_core::reader::{
    decode_span, predict_distributions, prepare_tokens, DecodeMode, EmbeddingTable,
};
use tqr_core::text::{annotate, apply_tfidf, detokenize};
use tqr_core::training::{loss_log_csv, train};

fn tool_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn rel_name(path: &Path, base: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .display()
        .to_string()
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)
        .with_context(|| format!("cannot create output directory {}", out.display()))
}

// ── prepare ──────────────────────────────────────────────────────────

pub fn cmd_prepare(
    input: Option<&Path>,
    synthetic: Option<usize>,
    out: &Path,
    seed: u64,
) -> Result<()> {
    let records: Vec<RawRecord> = match (input, synthetic) {
        (Some(dir), None) => records_from_xml_dir(dir)?,
        (None, Some(n)) => {
            if n < 1 {
                bail!("--synthetic must be at least 1");
            }
            generate_synthetic(n, seed)
        }
        _ => bail!("exactly one of --input or --synthetic is required"),
    };

    let dataset = Dataset::from_records(records, "prepare")?;
    let (split, split_records) = split_dataset(&dataset, seed)?;
    let stats = CorpusStats::from_dataset(&dataset);

    ensure_out_dir(out)?;
    let files = [
        ("train.jsonl", &split_records.train),
        ("dev.jsonl", &split_records.dev),
        ("test.jsonl", &split_records.test),
    ];
    let mut artifact_paths = Vec::new();
    for (name, records) in files {
        let path = out.join(name);
        std::fs::write(&path, tqr_core::corpus::dataset::records_to_jsonl(records)?)?;
        artifact_paths.push(path);
    }
    let manifest_path = out.join(SPLIT_MANIFEST_FILE);
    let mut manifest_bytes = serde_json::to_vec_pretty(&split.manifest())?;
    manifest_bytes.push(b'\n');
    std::fs::write(&manifest_path, manifest_bytes)?;
    artifact_paths.push(manifest_path);

    // manifest paths are relative to the output directory so identical
    // runs yield identical trees wherever they land
    let inputs = artifact_paths
        .iter()
        .map(|p| {
            let mut h = hash_file(p)?;
            h.path = rel_name(p, out);
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?;
    RunManifest {
        command: "prepare".into(),
        tool_version: tool_version(),
        seed,
        config: None,
        inputs,
        artifacts: artifact_paths.iter().map(|p| rel_name(p, out)).collect(),
    }
    .write_atomic(&out.join(RUN_MANIFEST_FILE))?;

    println!("{}", stats.summary_line());
    Ok(())
}

fn records_from_xml_dir(dir: &Path) -> Result<Vec<RawRecord>> {
    if !dir.is_dir() {
        bail!("input directory {} does not exist", dir.display());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .map_or(false, |ext| ext == "xml" || ext == "txt")
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .xml or .txt files in {}", dir.display());
    }
    let mut records = Vec::new();
    for path in &paths {
        let content = std::fs::read_to_string(path)?;
        let doc = parse_timex2(&content)
            .map_err(|e| anyhow!("{}: {e}", path.display()))?;
        let doc_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "doc".into());
        for (i, skeleton) in split_paragraphs(&doc).iter().enumerate() {
            if skeleton.timexes.is_empty() {
                continue; // paragraphs without temporal expressions are not counted
            }
            records.extend(augment::records_from_skeleton(
                &doc_id,
                &format!("p{i:04}"),
                skeleton,
            ));
        }
    }
    if records.is_empty() {
        bail!("no temporal expressions found under {}", dir.display());
    }
    Ok(records)
}

// ── train ────────────────────────────────────────────────────────────

pub fn cmd_train(data: &Path, config_path: Option<&Path>, out: &Path) -> Result<()> {
    let config = match config_path {
        Some(p) => CliConfig::load(p)?,
        None => CliConfig::default(),
    };
    let (split, data_paths) = load_split(data)?;
    let table = build_table(&config, &split)?;

    ensure_out_dir(out)?;
    let artifacts = vec![
        out.join(CHECKPOINT_FILE),
        out.join(EMBEDDINGS_FILE),
        out.join(crate::artifacts::CONFIG_SNAPSHOT_FILE),
        out.join(DF_TABLE_FILE),
        out.join(LOSS_LOG_FILE),
    ];
    let inputs = data_paths
        .iter()
        .map(|p| hash_file(p))
        .collect::<Result<Vec<_>>>()?;
    RunManifest {
        command: "train".into(),
        tool_version: tool_version(),
        seed: config.train.seed,
        config: Some(render_config(&config)),
        inputs,
        artifacts: artifacts.iter().map(|p| rel_name(p, out)).collect(),
    }
    .write_atomic(&out.join(RUN_MANIFEST_FILE))?;

    let output = train(&split, &table, &config.train, Some(out))?;

    save_checkpoint(&output.selected_params().store, &artifacts[0])?;
    table.save_text(&artifacts[1])?;
    write_config_snapshot(out, &config)?;
    output.df_table.save_tsv(&artifacts[3])?;
    std::fs::write(&artifacts[4], loss_log_csv(&output.log))?;

    let last = output.log.last().expect("at least one epoch");
    println!(
        "trained {} epochs; final train loss {}",
        output.log.len(),
        last.train_loss
    );
    if let Some((epoch, _)) = &output.best {
        println!("best dev exact match at epoch {epoch}; checkpoint holds that model");
    }
    if let Some(dev) = &last.dev {
        println!("{}", MetricsReport::table_header("dev (final epoch)"));
        println!("{}", dev.table_row("dev (final epoch)"));
    }
    println!("artifacts in {}", out.display());
    Ok(())
}

fn build_table(config: &CliConfig, split: &tqr_core::corpus::DatasetSplit) -> Result<EmbeddingTable> {
    match &config.embeddings {
        Some(path) => {
            let table = EmbeddingTable::load_text(path)?;
            if table.dim() != config.train.embedding_dim {
                bail!(
                    "embedding file dimension {} does not match configured embedding_dim {}",
                    table.dim(),
                    config.train.embedding_dim
                );
            }
            Ok(table)
        }
        None => Ok(EmbeddingTable::random(
            split_vocab(split),
            config.train.embedding_dim,
            config.train.seed,
        )),
    }
}

// ── eval ─────────────────────────────────────────────────────────────

pub fn cmd_eval(
    data: &Path,
    ckpt: &Path,
    split_name: &str,
    decode: DecodeMode,
    out_csv: Option<&Path>,
) -> Result<()> {
    let bundle = load_bundle(ckpt)?;
    let (split, _) = load_split(data)?;
    let examples = match split_name {
        "dev" => &split.dev,
        "test" => &split.test,
        "train" => &split.train,
        other => bail!("unknown split '{other}' (expected dev, test, or train)"),
    };
    if examples.is_empty() {
        bail!("split '{split_name}' is empty");
    }

    let mask = bundle.config.train.feature_mask;
    let mut rows = Vec::new();
    println!("{}", MetricsReport::table_header("report"));
    for mode in [DecodeMode::RawArgmax, DecodeMode::Constrained] {
        let report = evaluate(examples, &bundle.params, &bundle.table, &bundle.df, &mask, mode)?;
        let label = format!(
            "{split_name}/{}",
            match mode {
                DecodeMode::RawArgmax => "raw",
                DecodeMode::Constrained => "constrained",
            }
        );
        println!("{}", report.table_row(&label));
        rows.push((label, mode, report));
    }

    if let Some(path) = out_csv {
        let mut csv = String::from("label,start_acc,end_acc,mean,exact_match,n\n");
        for (label, mode, report) in &rows {
            if *mode == decode {
                csv.push_str(&format!(
                    "{label},{},{},{},{},{}\n",
                    report.start_acc,
                    report.end_acc,
                    report.mean,
                    report.exact_match,
                    report.n_examples
                ));
            }
        }
        std::fs::write(path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

// ── ablate ───────────────────────────────────────────────────────────

pub fn cmd_ablate(data: &Path, config_path: Option<&Path>, specs_arg: &str, out: &Path) -> Result<()> {
    let config = match config_path {
        Some(p) => CliConfig::load(p)?,
        None => CliConfig::default(),
    };
    let specs = if specs_arg == "table3" {
        table3_specs()
    } else {
        let text = std::fs::read_to_string(specs_arg)
            .with_context(|| format!("cannot read spec file {specs_arg}"))?;
        specs_from_tsv(&text)?
    };
    let (split, data_paths) = load_split(data)?;
    let table = build_table(&config, &split)?;

    ensure_out_dir(out)?;
    let artifacts = vec![out.join("ablation.csv"), out.join("ablation.txt"), out.join("specs.tsv")];
    let inputs = data_paths
        .iter()
        .map(|p| hash_file(p))
        .collect::<Result<Vec<_>>>()?;
    RunManifest {
        command: "ablate".into(),
        tool_version: tool_version(),
        seed: config.train.seed,
        config: Some(render_config(&config)),
        inputs,
        artifacts: artifacts.iter().map(|p| rel_name(p, out)).collect(),
    }
    .write_atomic(&out.join(RUN_MANIFEST_FILE))?;

    let runs = run_ablation(&split, &table, &config.train, &specs)?;
    let text = ablation_table_text(&runs);
    print!("{text}");
    std::fs::write(&artifacts[0], ablation_csv(&runs))?;
    std::fs::write(&artifacts[1], &text)?;
    std::fs::write(&artifacts[2], specs_to_tsv(&specs))?;
    println!("artifacts in {}", out.display());
    Ok(())
}

// ── ask ──────────────────────────────────────────────────────────────

pub fn cmd_ask(ckpt: &Path, paragraph_arg: &str, question: &str, decode: DecodeMode) -> Result<()> {
    if question.trim().is_empty() {
        bail!("question is empty");
    }
    let paragraph_text = {
        let as_path = Path::new(paragraph_arg);
        if as_path.is_file() {
            std::fs::read_to_string(as_path)?
        } else {
            paragraph_arg.to_string()
        }
    };
    if paragraph_text.trim().is_empty() {
        bail!("paragraph is empty");
    }

    let bundle = load_bundle(ckpt)?;
    let mut p_tokens = annotate(&paragraph_text);
    if p_tokens.is_empty() {
        bail!("paragraph contains no tokens");
    }
    apply_tfidf(&mut p_tokens, &bundle.df)?;
    let q_tokens = annotate(question);
    if q_tokens.is_empty() {
        bail!("question contains no tokens");
    }

    let mask = bundle.config.train.feature_mask;
    let ex = prepare_tokens(&p_tokens, &q_tokens, 0, 0, &bundle.table, &mask)?;
    let (p_start, p_end) = predict_distributions(&bundle.params, &ex)?;
    let pred = decode_span(
        &p_start,
        &p_end,
        decode,
        bundle.params.config.max_span_len,
    );

    let answer = if pred.start <= pred.end {
        detokenize(&paragraph_text, &p_tokens, pred.start, pred.end)
    } else {
        // raw mode can invert the span; there is no text to print then
        String::from("(inverted span: end precedes start)")
    };
    println!("answer: {answer}");
    println!("tokens: {}..={}", pred.start, pred.end);
    println!(
        "start_prob: {:.4}  end_prob: {:.4}",
        pred.start_prob, pred.end_prob
    );
    Ok(())
}

// ── print-config ─────────────────────────────────────────────────────

pub fn cmd_print_config() -> Result<()> {
    print!("{}", render_config(&CliConfig::default()));
    Ok(())
}
