//! `biaslab`: one entry point for the media-bias pipeline — ingest,
//! aggregation, agreement, lexicon baseline, weak labeling, training, and
//! cross-validated evaluation.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::data::{LabelArg, MetricArg};
use commands::Ctx;
use config::{FormatArg, PipelineConfig, SpanArg};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "biaslab",
    version,
    about = "Media-bias annotation pipeline: aggregation, agreement, weak labels, training, evaluation",
    after_help = "Outputs are JSON (one document per command, records as JSONL). \
                  Identical inputs and seeds reproduce identical bytes."
)]
struct Cli {
    /// TOML config file supplying default paths and settings; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for anything random; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output destination. For record-producing commands (aggregate,
    /// baseline, build-distant, pretrain, finetune) this names the artifact
    /// file; for the rest it redirects the summary JSON from stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Indent JSON output for reading.
    #[arg(long, global = true)]
    pretty: bool,

    /// Suppress warnings and progress notes on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a gold annotation file and print corpus counts.
    Ingest {
        /// Gold sentences + annotations (JSONL or CSV).
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Parse as this format instead of sniffing the extension.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// How biased_spans ranges are encoded.
        #[arg(long, value_enum)]
        spans: Option<SpanArg>,
    },
    /// Majority-vote gold labels and biased-word sets (records to --out).
    Aggregate {
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Distinct raters required per biased word (default: per-source).
        #[arg(long)]
        word_threshold: Option<usize>,
        /// Include the class-distribution report in the summary.
        #[arg(long)]
        report: bool,
    },
    /// Inter-rater agreement over the raw votes.
    Agreement {
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Which label to score.
        #[arg(long, value_enum)]
        label: LabelArg,
        /// Agreement statistic.
        #[arg(long, value_enum, default_value = "alpha")]
        metric: MetricArg,
    },
    /// Lexicon one-hit classifier (predictions to --out, scores to stdout).
    Baseline {
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Directory of *.txt word lists.
        #[arg(long)]
        lexicons: Option<PathBuf>,
    },
    /// Weakly labeled corpus from headlines + outlet leanings (--out JSONL).
    BuildDistant {
        /// Headlines JSONL ({"id","text","outlet"} per line).
        #[arg(long)]
        headlines: Option<PathBuf>,
        /// Outlet leanings CSV (outlet,leaning).
        #[arg(long)]
        leanings: Option<PathBuf>,
        /// Gold file the weak corpus must stay disjoint from.
        #[arg(long)]
        gold: Option<PathBuf>,
    },
    /// Pre-train on a weak corpus; checkpoint to --out.
    Pretrain {
        /// Weak corpus JSONL (from build-distant).
        #[arg(long)]
        weak: Option<PathBuf>,
        /// Gold file whose text joins the vocabulary build.
        #[arg(long)]
        gold: Option<PathBuf>,
        /// TrainConfig file (TOML or JSON).
        #[arg(long, value_name = "FILE")]
        model_config: Option<PathBuf>,
    },
    /// Fine-tune on majority-vote gold labels; checkpoint to --out.
    Finetune {
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Resume from this checkpoint (omit to train from scratch).
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,
        /// TrainConfig file (TOML or JSON).
        #[arg(long, value_name = "FILE")]
        model_config: Option<PathBuf>,
    },
    /// Score text with a trained checkpoint.
    Predict {
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        /// One sentence to score.
        #[arg(long)]
        text: Option<String>,
        /// JSONL file of {"id","text"} lines to score.
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
    },
    /// Stratified k-fold evaluation of the (optionally pre-trained) model.
    Evaluate {
        #[arg(long)]
        gold: Option<PathBuf>,
        /// Weak corpus JSONL enabling the pre-training stage.
        #[arg(long)]
        weak: Option<PathBuf>,
        /// TrainConfig file (TOML or JSON).
        #[arg(long, value_name = "FILE")]
        model_config: Option<PathBuf>,
        /// Fold count.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Run every configured stage and emit one combined JSON report.
    Report,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let ctx = Ctx {
        config,
        seed: cli.seed,
        out: cli.out,
        pretty: cli.pretty,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Ingest {
            gold,
            format,
            spans,
        } => commands::data::ingest(&ctx, gold, format, spans),
        Command::Aggregate {
            gold,
            word_threshold,
            report,
        } => commands::data::aggregate(&ctx, gold, word_threshold, report),
        Command::Agreement {
            gold,
            label,
            metric,
        } => commands::data::agreement(&ctx, gold, label, metric),
        Command::Baseline { gold, lexicons } => commands::data::baseline(&ctx, gold, lexicons),
        Command::BuildDistant {
            headlines,
            leanings,
            gold,
        } => commands::data::build_distant(&ctx, headlines, leanings, gold),
        Command::Pretrain {
            weak,
            gold,
            model_config,
        } => commands::model::pretrain(&ctx, weak, gold, model_config),
        Command::Finetune {
            gold,
            checkpoint,
            model_config,
        } => commands::model::finetune(&ctx, gold, checkpoint, model_config),
        Command::Predict {
            checkpoint,
            text,
            input,
        } => commands::model::predict(&ctx, checkpoint, text, input),
        Command::Evaluate {
            gold,
            weak,
            model_config,
            k,
        } => commands::pipeline::evaluate(&ctx, gold, weak, model_config, k),
        Command::Report => commands::pipeline::report(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are successful outcomes; anything else is a
            // usage error and exits 1 with clap's message.
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            for cause in err.sources() {
                eprintln!("  caused by: {cause}");
            }
            ExitCode::from(err.exit_code())
        }
    }
}
