//! `tqr`: prepare temporal QA datasets, train the span reader, evaluate,
//! run feature ablations, and answer one-off questions.
//!
//! Exit codes: 0 success, 2 input/config error, 3 numeric abort.

mod artifacts;
mod commands;
mod config;
mod manifest;
mod specs;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use tqr_core::reader::DecodeMode;
use tqr_core::CoreError;

#[derive(Parser)]
#[command(name = "tqr", version, about = "Extractive question answering over temporal expressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecodeArg {
    Raw,
    Constrained,
}

impl From<DecodeArg> for DecodeMode {
    fn from(v: DecodeArg) -> Self {
        match v {
            DecodeArg::Raw => DecodeMode::RawArgmax,
            DecodeArg::Constrained => DecodeMode::Constrained,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse TIMEX2 XML or generate a synthetic corpus, validate, split
    /// 80/10/10 by paragraph, and write train/dev/test JSONL
    Prepare {
        /// directory of TIMEX2-annotated .xml/.txt documents
        #[arg(long, conflicts_with = "synthetic")]
        input: Option<PathBuf>,
        /// generate this many synthetic paragraphs instead
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Train on a prepared data directory and write the best checkpoint,
    /// embeddings, config snapshot, df table, and loss log
    Train {
        #[arg(long)]
        data: PathBuf,
        /// flat key=value config file; defaults printed by print-config
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint on one split, reporting raw and constrained
    /// decoding
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, default_value = "dev")]
        split: String,
        /// which decode mode lands in the CSV
        #[arg(long, value_enum, default_value = "raw")]
        decode: DecodeArg,
        /// write the selected report as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train once per feature mask and print the ablation table
    Ablate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// "table3" for the built-in ten rows, or a spec file path
        #[arg(long, default_value = "table3")]
        specs: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer one question over one paragraph with a trained checkpoint
    Ask {
        #[arg(long)]
        ckpt: PathBuf,
        /// paragraph text, or a path to a file containing it
        #[arg(long)]
        paragraph: String,
        #[arg(long)]
        question: String,
        #[arg(long, value_enum, default_value = "constrained")]
        decode: DecodeArg,
    },
    /// Dump the default configuration as key = value lines
    PrintConfig,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Prepare {
            input,
            synthetic,
            out,
            seed,
        } => commands::cmd_prepare(input.as_deref(), synthetic, &out, seed),
        Command::Train { data, config, out } => {
            commands::cmd_train(&data, config.as_deref(), &out)
        }
        Command::Eval {
            data,
            ckpt,
            split,
            decode,
            out,
        } => commands::cmd_eval(&data, &ckpt, &split, decode.into(), out.as_deref()),
        Command::Ablate {
            data,
            config,
            specs,
            out,
        } => commands::cmd_ablate(&data, config.as_deref(), &specs, &out),
        Command::Ask {
            ckpt,
            paragraph,
            question,
            decode,
        } => commands::cmd_ask(&ckpt, &paragraph, &question, decode.into()),
        Command::PrintConfig => commands::cmd_print_config(),
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::NumericAbort { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(threads) = std::env::var("TQR_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => log::warn!("ignoring invalid TQR_THREADS value '{threads}'"),
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
