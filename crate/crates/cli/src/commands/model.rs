//! Model subcommands: pretrain, finetune, predict.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use biaslab_core::distant::load_weak;
use biaslab_core::model::checkpoint::{self, Checkpoint};
use biaslab_core::model::{
    finetune as run_finetune, predict as predict_text, pretrain as run_pretrain, split_validation,
    train_two_stage, LabeledSequence, TrainConfig, Vocabulary,
};
use biaslab_core::{Error as CoreError, WeakLabel};

use crate::config::load_train_config;
use crate::error::CliError;
use crate::output::write_jsonl;

use super::{gold_bias_items, Ctx};

/// Training hyperparameters: `--model-config` file first, then the config
/// file's `[train]` table, then defaults; the seed follows `--seed` > config
/// `seed` > the table's own seed.
pub fn resolve_train_config(
    ctx: &Ctx,
    model_config: Option<&Path>,
) -> Result<TrainConfig, CliError> {
    let mut cfg = match model_config {
        Some(path) => load_train_config(path)?,
        None => ctx.config.train.clone().unwrap_or_default(),
    };
    cfg.seed = ctx.effective_seed(cfg.seed);
    cfg.validate()?;
    Ok(cfg)
}

// ---------------------------------------------------------------- pretrain

#[derive(Serialize)]
struct PretrainSummary {
    checkpoint: String,
    n_weak: usize,
    vocab_size: usize,
    epochs: usize,
    seed: u64,
    /// Whether gold text was folded into the vocabulary build.
    gold_vocabulary: bool,
}

/// Pre-trains on a weak corpus and writes the checkpoint to `--out`. Pass
/// `--gold` so the vocabulary also covers the text you will finetune on.
pub fn pretrain(
    ctx: &Ctx,
    weak: Option<PathBuf>,
    gold: Option<PathBuf>,
    model_config: Option<PathBuf>,
) -> Result<(), CliError> {
    let weak_path = ctx.require_path(weak, ctx.config.weak.as_ref(), "weak")?;
    let out = ctx.artifact_out("checkpoint")?;
    let records = load_weak(&weak_path)?;
    let cfg = resolve_train_config(ctx, model_config.as_deref())?;

    let gold_store = match ctx.optional_path(gold, ctx.config.gold.as_ref()) {
        Some(path) => Some(ctx.load_gold(Some(path), None, None)?.0),
        None => None,
    };
    let gold_texts = gold_store
        .iter()
        .flat_map(|store| store.sentences().iter().map(|s| s.text.as_str()));
    let vocabulary = Vocabulary::build(
        records.iter().map(|r| r.text.as_str()).chain(gold_texts),
        cfg.min_freq,
    );
    let sequences: Vec<LabeledSequence> = records
        .iter()
        .map(|r| LabeledSequence {
            tokens: vocabulary.encode(&r.text),
            biased: r.weak_label == WeakLabel::Biased,
        })
        .collect();
    let params = run_pretrain(&sequences, vocabulary.len(), &cfg)?;

    let summary = PretrainSummary {
        checkpoint: out.display().to_string(),
        n_weak: sequences.len(),
        vocab_size: vocabulary.len(),
        epochs: cfg.pretrain_epochs,
        seed: cfg.seed,
        gold_vocabulary: gold_store.is_some(),
    };
    checkpoint::save(out, &Checkpoint::new(cfg, vocabulary, params)?)?;
    ctx.emit_stdout(&summary)
}

// ---------------------------------------------------------------- finetune

#[derive(Serialize)]
struct FinetuneSummary {
    checkpoint: String,
    pretrained: bool,
    n_train_sentences: usize,
    excluded_no_agreement: usize,
    best_val_loss: f64,
    best_epoch: usize,
    epochs_run: usize,
    seed: u64,
}

/// Fine-tunes on majority-vote gold labels. With `--checkpoint` it resumes
/// from pre-trained parameters (and their vocabulary); without it it trains
/// from a fresh initialization. Writes the result to `--out`.
pub fn finetune(
    ctx: &Ctx,
    gold: Option<PathBuf>,
    from_checkpoint: Option<PathBuf>,
    model_config: Option<PathBuf>,
) -> Result<(), CliError> {
    let (store, _) = ctx.load_gold(gold, None, None)?;
    let out = ctx.artifact_out("checkpoint")?;
    let (items, excluded) = gold_bias_items(&store)?;

    let (cfg, vocabulary, params, best_val_loss, best_epoch, epochs_run, pretrained);
    match from_checkpoint {
        Some(ckpt_path) => {
            let ckpt = checkpoint::load(&ckpt_path)?;
            cfg = match model_config {
                Some(path) => resolve_train_config(ctx, Some(&path))?,
                None => {
                    let mut from_ckpt = ckpt.config.clone();
                    from_ckpt.seed = ctx.effective_seed(from_ckpt.seed);
                    from_ckpt
                }
            };
            vocabulary = ckpt.vocabulary;
            let sequences: Vec<LabeledSequence> = items
                .iter()
                .map(|item| LabeledSequence {
                    tokens: vocabulary.encode(&item.payload),
                    biased: item.biased,
                })
                .collect();
            let (train, val) = split_validation(&sequences, cfg.val_fraction, cfg.seed)?;
            let result = run_finetune(&train, &val, ckpt.params, &cfg)?;
            params = result.params;
            best_val_loss = result.best_val_loss;
            best_epoch = result.best_epoch;
            epochs_run = result.epochs_run;
            pretrained = true;
        }
        None => {
            cfg = resolve_train_config(ctx, model_config.as_deref())?;
            let pairs: Vec<(&str, bool)> = items
                .iter()
                .map(|item| (item.payload.as_str(), item.biased))
                .collect();
            let outcome = train_two_stage(&[], &pairs, &cfg)?;
            vocabulary = outcome.vocabulary;
            params = outcome.params;
            best_val_loss = outcome.best_val_loss;
            best_epoch = outcome.best_epoch;
            epochs_run = outcome.epochs_run;
            pretrained = false;
        }
    }

    let summary = FinetuneSummary {
        checkpoint: out.display().to_string(),
        pretrained,
        n_train_sentences: items.len(),
        excluded_no_agreement: excluded,
        best_val_loss,
        best_epoch,
        epochs_run,
        seed: cfg.seed,
    };
    checkpoint::save(out, &Checkpoint::new(cfg, vocabulary, params)?)?;
    ctx.emit_stdout(&summary)
}

// ----------------------------------------------------------------- predict

#[derive(Deserialize)]
struct InputLine {
    #[serde(default)]
    id: Option<String>,
    text: String,
}

#[derive(Serialize)]
struct PredictionLine {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    label: biaslab_core::SentenceLabel,
    p_biased: f64,
}

/// Scores text with a trained checkpoint: either one `--text` string or a
/// JSONL `--input` file of `{"id", "text"}` lines.
pub fn predict(
    ctx: &Ctx,
    ckpt_path: PathBuf,
    text: Option<String>,
    input: Option<PathBuf>,
) -> Result<(), CliError> {
    if text.is_some() == input.is_some() {
        return Err(CliError::Usage(
            "pass exactly one of --text or --input".to_string(),
        ));
    }
    let ckpt = checkpoint::load(&ckpt_path)?;
    match (text, input) {
        (Some(text), None) => {
            let prediction = predict_text(&text, &ckpt.vocabulary, &ckpt.params)?;
            ctx.emit(&prediction)
        }
        (None, Some(input_path)) => {
            let raw =
                std::fs::read_to_string(&input_path).map_err(|e| CoreError::io(&input_path, e))?;
            let mut lines = Vec::new();
            for (lineno, line) in raw.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let parsed: InputLine =
                    serde_json::from_str(line).map_err(|e| CoreError::Parse {
                        path: input_path.display().to_string(),
                        line: lineno + 1,
                        message: e.to_string(),
                    })?;
                let prediction = predict_text(&parsed.text, &ckpt.vocabulary, &ckpt.params)?;
                lines.push(PredictionLine {
                    id: parsed.id,
                    label: prediction.label,
                    p_biased: prediction.p_biased,
                });
            }
            match ctx.out.as_deref() {
                Some(out) => write_jsonl(out, &lines)?,
                None => {
                    for line in &lines {
                        println!("{}", serde_json::to_string(line).map_err(CoreError::from)?);
                    }
                }
            }
            Ok(())
        }
        _ => unreachable!("exactly one input mode is guaranteed above"),
    }
}
