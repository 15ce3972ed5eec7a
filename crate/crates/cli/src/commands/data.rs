//! Data-stage subcommands: ingest, aggregate, agreement, baseline, and
//! build-distant.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::Serialize;

use biaslab_core::aggregation::{aggregate_store, distribution, DistributionReport};
use biaslab_core::agreement::{
    fleiss_kappa, krippendorff_alpha, matrix_from_store, AgreementTarget, AlphaOptions,
};
use biaslab_core::baseline::{classify_sentence, tag_words, LexiconSet};
use biaslab_core::corpus::{load_headlines, load_leanings, save_gold, tokenize};
use biaslab_core::distant::{build_corpus, corpus_stats, CorpusStats};
use biaslab_core::eval::{f1, F1Scores};
use biaslab_core::{GoldStore, SentenceLabel};

use crate::config::{FormatArg, SpanArg};
use crate::error::CliError;
use crate::output::write_jsonl;

use super::{gold_bias_items, Ctx};

// ------------------------------------------------------------------ ingest

#[derive(Serialize)]
struct IngestSummary {
    gold: String,
    sentences: usize,
    annotations: usize,
    raters: usize,
    source_sets: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized_out: Option<String>,
}

/// Validates a gold file and prints corpus counts; `--out` additionally
/// writes the store back in canonical JSONL (useful for CSV or token-span
/// inputs).
pub fn ingest(
    ctx: &Ctx,
    gold: Option<PathBuf>,
    format: Option<FormatArg>,
    spans: Option<SpanArg>,
) -> Result<(), CliError> {
    let (store, path) = ctx.load_gold(gold, format, spans)?;
    let raters: BTreeSet<&str> = store
        .annotations()
        .iter()
        .map(|a| a.rater_id.as_str())
        .collect();
    let mut source_sets = BTreeMap::new();
    for sentence in store.sentences() {
        let key = serde_json::to_value(sentence.source_set)?
            .as_str()
            .expect("source sets serialize as strings")
            .to_string();
        *source_sets.entry(key).or_insert(0) += 1;
    }
    let normalized_out = match ctx.out.as_deref() {
        Some(out) => {
            save_gold(out, &store)?;
            Some(out.display().to_string())
        }
        None => None,
    };
    ctx.emit_stdout(&IngestSummary {
        gold: path.display().to_string(),
        sentences: store.sentences().len(),
        annotations: store.annotations().len(),
        raters: raters.len(),
        source_sets,
        normalized_out,
    })
}

// --------------------------------------------------------------- aggregate

#[derive(Serialize)]
struct AggregateSummary {
    sentences: usize,
    labeled: usize,
    word_threshold: WordThreshold,
    #[serde(skip_serializing_if = "Option::is_none")]
    records_out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<DistributionReport>,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum WordThreshold {
    PerSourceDefault,
    Fixed(usize),
}

/// Aggregates rater annotations into gold labels; `--out` receives the
/// label records as JSONL and `--report` adds the class distribution.
pub fn aggregate(
    ctx: &Ctx,
    gold: Option<PathBuf>,
    word_threshold: Option<usize>,
    report: bool,
) -> Result<(), CliError> {
    let (store, _) = ctx.load_gold(gold, None, None)?;
    let threshold = word_threshold.or(ctx.config.word_threshold);
    let labels = aggregate_store(&store, threshold)?;

    let records_out = match ctx.out.as_deref() {
        Some(out) => {
            write_jsonl(out, &labels)?;
            Some(out.display().to_string())
        }
        None => None,
    };
    let dist = if report {
        Some(distribution(&labels)?)
    } else {
        None
    };
    ctx.emit_stdout(&AggregateSummary {
        sentences: store.sentences().len(),
        labeled: labels.len(),
        word_threshold: threshold.map_or(WordThreshold::PerSourceDefault, WordThreshold::Fixed),
        records_out,
        distribution: dist,
    })
}

// --------------------------------------------------------------- agreement

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LabelArg {
    Bias,
    Opinion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum MetricArg {
    #[default]
    Alpha,
    Fleiss,
}

#[derive(Serialize)]
pub struct AgreementOutput {
    pub label: &'static str,
    pub metric: &'static str,
    pub statistic: f64,
    pub n_items: usize,
    pub n_raters: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_pairable: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed_disagreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_disagreement: Option<f64>,
    /// The statistic covers every raw vote, including sentences whose
    /// majority vote reached no agreement.
    pub votes: &'static str,
}

pub fn agreement_output(
    store: &GoldStore,
    label: LabelArg,
    metric: MetricArg,
) -> Result<AgreementOutput, CliError> {
    let target = match label {
        LabelArg::Bias => AgreementTarget::Bias,
        LabelArg::Opinion => AgreementTarget::Opinion,
    };
    let matrix = matrix_from_store(store, target)?;
    let label = match label {
        LabelArg::Bias => "bias",
        LabelArg::Opinion => "opinion",
    };
    let out = match metric {
        MetricArg::Alpha => {
            let result = krippendorff_alpha(&matrix, AlphaOptions::default())?;
            AgreementOutput {
                label,
                metric: "krippendorff_alpha",
                statistic: result.alpha,
                n_items: matrix.n_items(),
                n_raters: matrix.n_raters(),
                n_pairable: Some(result.n_pairable),
                observed_disagreement: Some(result.observed_disagreement),
                expected_disagreement: Some(result.expected_disagreement),
                votes: "all raw votes, no exclusions",
            }
        }
        MetricArg::Fleiss => AgreementOutput {
            label,
            metric: "fleiss_kappa",
            statistic: fleiss_kappa(&matrix)?,
            n_items: matrix.n_items(),
            n_raters: matrix.n_raters(),
            n_pairable: None,
            observed_disagreement: None,
            expected_disagreement: None,
            votes: "all raw votes, no exclusions",
        },
    };
    Ok(out)
}

/// Inter-rater agreement over the raw votes of a gold file.
pub fn agreement(
    ctx: &Ctx,
    gold: Option<PathBuf>,
    label: LabelArg,
    metric: MetricArg,
) -> Result<(), CliError> {
    let (store, _) = ctx.load_gold(gold, None, None)?;
    ctx.emit(&agreement_output(&store, label, metric)?)
}

// ---------------------------------------------------------------- baseline

#[derive(Serialize)]
struct BaselinePrediction<'a> {
    sentence_id: &'a str,
    label: SentenceLabel,
    matched_words: Vec<&'a str>,
}

#[derive(Serialize)]
pub struct BaselineSummary {
    pub lexicon_lists: usize,
    pub lexicon_entries: usize,
    pub sentences: usize,
    pub scored: usize,
    pub excluded_no_agreement: usize,
    pub f1: F1Scores,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predictions_out: Option<String>,
}

pub fn baseline_summary(
    store: &GoldStore,
    lexicons: &std::path::Path,
    predictions_out: Option<&std::path::Path>,
) -> Result<BaselineSummary, CliError> {
    let lexicon = LexiconSet::from_dir(lexicons)?;
    let tokenized: Vec<_> = store
        .sentences()
        .iter()
        .map(|s| (s, tokenize(&s.text)))
        .collect();

    let written = match predictions_out {
        Some(out) => {
            let records = tokenized.iter().map(|(s, tokens)| {
                let flags = tag_words(tokens, &lexicon);
                BaselinePrediction {
                    sentence_id: &s.id,
                    label: classify_sentence(tokens, &lexicon),
                    matched_words: tokens
                        .iter()
                        .zip(&flags)
                        .filter(|(_, hit)| **hit)
                        .map(|(t, _)| t.surface.as_str())
                        .collect(),
                }
            });
            write_jsonl(out, records)?;
            Some(out.display().to_string())
        }
        None => None,
    };

    // Score against the majority-vote gold labels, where those exist.
    let (items, excluded) = gold_bias_items(store)?;
    let by_id: BTreeMap<&str, bool> = items
        .iter()
        .map(|item| (item.id.as_str(), item.biased))
        .collect();
    let mut preds = Vec::new();
    let mut golds = Vec::new();
    for (sentence, tokens) in &tokenized {
        if let Some(&gold_biased) = by_id.get(sentence.id.as_str()) {
            preds.push(classify_sentence(tokens, &lexicon) == SentenceLabel::Biased);
            golds.push(gold_biased);
        }
    }
    Ok(BaselineSummary {
        lexicon_lists: lexicon.lists().count(),
        lexicon_entries: lexicon.total_entries(),
        sentences: store.sentences().len(),
        scored: preds.len(),
        excluded_no_agreement: excluded,
        f1: f1(&preds, &golds)?,
        predictions_out: written,
    })
}

/// Lexicon one-hit classifier: predictions to `--out`, scores to stdout.
pub fn baseline(
    ctx: &Ctx,
    gold: Option<PathBuf>,
    lexicons: Option<PathBuf>,
) -> Result<(), CliError> {
    let (store, _) = ctx.load_gold(gold, None, None)?;
    let lexicons = ctx.require_path(lexicons, ctx.config.lexicons.as_ref(), "lexicons")?;
    let summary = baseline_summary(&store, &lexicons, ctx.out.as_deref())?;
    ctx.emit_stdout(&summary)
}

// ----------------------------------------------------------- build-distant

#[derive(Serialize)]
pub struct DistantSummary {
    pub input_headlines: usize,
    pub dropped_gold_overlap: usize,
    pub dropped_duplicate: usize,
    pub near_duplicate_warnings: usize,
    #[serde(flatten)]
    pub stats: CorpusStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records_out: Option<String>,
}

/// Builds the weakly labeled corpus: records to `--out`, stats to stdout,
/// near-duplicate warnings to stderr.
pub fn build_distant(
    ctx: &Ctx,
    headlines: Option<PathBuf>,
    leanings: Option<PathBuf>,
    gold: Option<PathBuf>,
) -> Result<(), CliError> {
    let headlines_path = ctx.require_path(headlines, ctx.config.headlines.as_ref(), "headlines")?;
    let leanings_path = ctx.require_path(leanings, ctx.config.leanings.as_ref(), "leanings")?;
    let (store, _) = ctx.load_gold(gold, None, None)?;
    let out = ctx.artifact_out("weak corpus JSONL")?;

    let headlines = load_headlines(&headlines_path)?;
    let leanings = load_leanings(&leanings_path)?;
    let build = build_corpus(&headlines, &leanings, store.sentences())?;
    for nd in &build.near_duplicates {
        ctx.warn(format_args!(
            "headline `{}` nearly duplicates gold sentence `{}` (jaccard {:.3}); kept",
            nd.headline_id, nd.gold_id, nd.jaccard
        ));
    }
    write_jsonl(out, &build.records)?;
    ctx.emit_stdout(&DistantSummary {
        input_headlines: headlines.len(),
        dropped_gold_overlap: build.dropped_overlap,
        dropped_duplicate: build.dropped_duplicate,
        near_duplicate_warnings: build.near_duplicates.len(),
        stats: corpus_stats(&build.records),
        records_out: Some(out.display().to_string()),
    })
}
