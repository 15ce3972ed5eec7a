//! Whole-pipeline subcommands: `evaluate` (cross-validated training) and
//! `report` (every stage, one JSON document).

use std::path::PathBuf;

use serde::Serialize;

use biaslab_core::aggregation::{aggregate_store, distribution, DistributionReport};
use biaslab_core::corpus::{load_headlines, load_leanings};
use biaslab_core::distant::{build_corpus, corpus_stats, load_weak};
use biaslab_core::eval::{cross_validate, CvItem, CvReport};
use biaslab_core::model::{predict, train_two_stage, TrainConfig};
use biaslab_core::{Error as CoreError, SentenceLabel, WeakRecord};

use crate::error::CliError;
use crate::output::write_jsonl;

use super::data::{
    agreement_output, baseline_summary, AgreementOutput, BaselineSummary, DistantSummary, LabelArg,
    MetricArg,
};
use super::model::resolve_train_config;
use super::{gold_bias_items, weak_training_pairs, Ctx};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Cross-validates the two-stage protocol: per fold, (optionally) pretrain
/// on the weak corpus, finetune on the fold's training sentences, predict
/// the held-out fold.
pub fn run_cv(
    items: &[CvItem<String>],
    excluded_no_agreement: usize,
    weak_pairs: &[(&str, bool)],
    cfg: &TrainConfig,
    k: usize,
) -> Result<CvReport, CoreError> {
    let trainer = |train: &[&CvItem<String>], test: &[&CvItem<String>]| {
        let train_pairs: Vec<(&str, bool)> = train
            .iter()
            .map(|item| (item.payload.as_str(), item.biased))
            .collect();
        let outcome = train_two_stage(weak_pairs, &train_pairs, cfg)?;
        let mut preds = Vec::with_capacity(test.len());
        for item in test {
            let p = predict(&item.payload, &outcome.vocabulary, &outcome.params)?;
            preds.push(p.label == SentenceLabel::Biased);
        }
        Ok(preds)
    };
    let mut report = cross_validate(items, k, cfg.seed, trainer)?;
    report.excluded_no_agreement = excluded_no_agreement;
    Ok(report)
}

/// The `evaluate`/`report` evaluation block: protocol facts, the resolved
/// hyperparameters, and the cross-validation scores.
#[derive(Serialize)]
pub struct EvalSection {
    pub pretrained: bool,
    pub n_weak: usize,
    pub train: TrainConfig,
    #[serde(flatten)]
    pub cv: CvReport,
}

#[derive(Serialize)]
struct EvaluationReport {
    format_version: u32,
    #[serde(flatten)]
    evaluation: EvalSection,
}

/// Cross-validated evaluation; the report JSON goes to `--out` or stdout.
pub fn evaluate(
    ctx: &Ctx,
    gold: Option<PathBuf>,
    weak: Option<PathBuf>,
    model_config: Option<PathBuf>,
    k: Option<usize>,
) -> Result<(), CliError> {
    let (store, _) = ctx.load_gold(gold, None, None)?;
    let (items, excluded) = gold_bias_items(&store)?;
    let cfg = resolve_train_config(ctx, model_config.as_deref())?;
    let k = k.or(ctx.config.k).unwrap_or(5);

    let weak_records: Vec<WeakRecord> = match ctx.optional_path(weak, ctx.config.weak.as_ref()) {
        Some(path) => load_weak(&path)?,
        None => Vec::new(),
    };
    let weak_pairs = weak_training_pairs(&weak_records);
    let cv = run_cv(&items, excluded, &weak_pairs, &cfg, k)?;
    ctx.emit(&EvaluationReport {
        format_version: REPORT_FORMAT_VERSION,
        evaluation: EvalSection {
            pretrained: !weak_pairs.is_empty(),
            n_weak: weak_pairs.len(),
            train: cfg,
            cv,
        },
    })
}

// ------------------------------------------------------------------ report

#[derive(Serialize)]
struct CorpusSummary {
    sentences: usize,
    annotations: usize,
    raters: usize,
}

#[derive(Serialize)]
struct AgreementSection {
    bias: AgreementOutput,
    opinion: AgreementOutput,
}

#[derive(Serialize)]
struct AggregationSection {
    labeled: usize,
    /// `null` means the per-source defaults applied.
    word_threshold: Option<usize>,
    distribution: DistributionReport,
}

#[derive(Serialize)]
struct PipelineReport {
    format_version: u32,
    seed: u64,
    gold: String,
    corpus: CorpusSummary,
    agreement: AgreementSection,
    aggregation: AggregationSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distant: Option<DistantSummary>,
    evaluation: EvalSection,
}

/// Runs every configured stage over the config file's inputs and emits one
/// combined JSON report. Stages without configured inputs (lexicons,
/// headlines + leanings) are omitted from the output rather than failing.
pub fn report(ctx: &Ctx) -> Result<(), CliError> {
    let (store, gold_path) = ctx.load_gold(None, None, None)?;
    let out_dir = ctx.config.out_dir.as_deref();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
    }

    let raters: std::collections::BTreeSet<&str> = store
        .annotations()
        .iter()
        .map(|a| a.rater_id.as_str())
        .collect();
    let corpus = CorpusSummary {
        sentences: store.sentences().len(),
        annotations: store.annotations().len(),
        raters: raters.len(),
    };

    let agreement = AgreementSection {
        bias: agreement_output(&store, LabelArg::Bias, MetricArg::Alpha)?,
        opinion: agreement_output(&store, LabelArg::Opinion, MetricArg::Alpha)?,
    };

    let labels = aggregate_store(&store, ctx.config.word_threshold)?;
    if let Some(dir) = out_dir {
        write_jsonl(&dir.join("gold_labels.jsonl"), &labels)?;
    }
    let aggregation = AggregationSection {
        labeled: labels.len(),
        word_threshold: ctx.config.word_threshold,
        distribution: distribution(&labels)?,
    };

    let baseline = match &ctx.config.lexicons {
        Some(lexicons) => {
            let predictions_out = out_dir.map(|dir| dir.join("baseline_predictions.jsonl"));
            Some(baseline_summary(
                &store,
                lexicons,
                predictions_out.as_deref(),
            )?)
        }
        None => None,
    };

    let (distant, built_weak) = match (&ctx.config.headlines, &ctx.config.leanings) {
        (Some(headlines_path), Some(leanings_path)) => {
            let headlines = load_headlines(headlines_path)?;
            let leanings = load_leanings(leanings_path)?;
            let build = build_corpus(&headlines, &leanings, store.sentences())?;
            for nd in &build.near_duplicates {
                ctx.warn(format_args!(
                    "headline `{}` nearly duplicates gold sentence `{}` (jaccard {:.3}); kept",
                    nd.headline_id, nd.gold_id, nd.jaccard
                ));
            }
            let records_out = match out_dir {
                Some(dir) => {
                    let path = dir.join("weak.jsonl");
                    write_jsonl(&path, &build.records)?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let summary = DistantSummary {
                input_headlines: headlines.len(),
                dropped_gold_overlap: build.dropped_overlap,
                dropped_duplicate: build.dropped_duplicate,
                near_duplicate_warnings: build.near_duplicates.len(),
                stats: corpus_stats(&build.records),
                records_out,
            };
            (Some(summary), build.records)
        }
        _ => (None, Vec::new()),
    };

    // Weak corpus precedence: freshly built, else a pre-built `weak` file.
    let loaded_weak: Vec<WeakRecord> = if built_weak.is_empty() {
        match &ctx.config.weak {
            Some(path) => load_weak(path)?,
            None => Vec::new(),
        }
    } else {
        built_weak
    };
    let weak_pairs = weak_training_pairs(&loaded_weak);

    let (items, excluded) = gold_bias_items(&store)?;
    let cfg = resolve_train_config(ctx, None)?;
    let k = ctx.config.k.unwrap_or(5);
    let cv = run_cv(&items, excluded, &weak_pairs, &cfg, k)?;

    let seed = cfg.seed;
    ctx.emit(&PipelineReport {
        format_version: REPORT_FORMAT_VERSION,
        seed,
        gold: gold_path.display().to_string(),
        corpus,
        agreement,
        aggregation,
        baseline,
        distant,
        evaluation: EvalSection {
            pretrained: !weak_pairs.is_empty(),
            n_weak: weak_pairs.len(),
            train: cfg,
            cv,
        },
    })
}
