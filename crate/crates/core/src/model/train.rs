//! Training loops: seeded pre-training, early-stopped fine-tuning, and the
//! two-stage driver that ties them together.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::net::{forward, gradients, loss, ModelParams};
use super::optim::{adam_step, AdamState};
use super::vocab::Vocabulary;
use super::{LabeledSequence, TrainConfig};
use crate::corpus::SentenceLabel;
use crate::error::{Error, Result};

/// Result of an early-stopped loop: the best snapshot and where it came
/// from. Epochs are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochOutcome<P> {
    pub best: P,
    pub best_val_loss: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

/// Runs `run_epoch` up to `max_epochs` times, tracking the best validation
/// loss. Stops after `patience` consecutive epochs without improving on the
/// best loss and returns the snapshot taken at the best epoch — never a
/// later, worse one. Improvement is strict (`loss < best`), so plateaus
/// count against patience.
pub fn train_with_early_stopping<P, F>(
    max_epochs: usize,
    patience: usize,
    mut run_epoch: F,
) -> Result<EpochOutcome<P>>
where
    F: FnMut(usize) -> Result<(P, f64)>,
{
    if max_epochs == 0 {
        return Err(Error::InvalidConfig("max_epochs must be at least 1".into()));
    }
    if patience == 0 {
        return Err(Error::InvalidConfig("patience must be at least 1".into()));
    }
    let mut best: Option<EpochOutcome<P>> = None;
    let mut bad_epochs = 0;
    for epoch in 1..=max_epochs {
        let (snapshot, val_loss) = run_epoch(epoch)?;
        let improved = best.as_ref().is_none_or(|b| val_loss < b.best_val_loss);
        if improved {
            best = Some(EpochOutcome {
                best: snapshot,
                best_val_loss: val_loss,
                best_epoch: epoch,
                epochs_run: epoch,
            });
            bad_epochs = 0;
        } else {
            bad_epochs += 1;
        }
        if let Some(b) = best.as_mut() {
            b.epochs_run = epoch;
        }
        if bad_epochs >= patience {
            break;
        }
    }
    best.ok_or(Error::EmptyInput("training epochs"))
}

fn run_one_epoch(
    pool: &mut [LabeledSequence],
    params: &mut ModelParams,
    adam: &mut AdamState,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    pool.shuffle(rng);
    for batch in pool.chunks(cfg.batch_size) {
        let (_, grads) = gradients(batch, params)?;
        adam_step(params, &grads, adam, cfg)?;
    }
    Ok(())
}

/// Trains fresh parameters for `cfg.pretrain_epochs` passes over the weak
/// corpus (seeded shuffle each epoch). Zero epochs returns the
/// initialization untouched.
pub fn pretrain(
    weak: &[LabeledSequence],
    vocab_size: usize,
    cfg: &TrainConfig,
) -> Result<ModelParams> {
    cfg.validate()?;
    if weak.is_empty() {
        return Err(Error::EmptyInput("pretraining corpus"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = ModelParams::init(vocab_size, cfg.embed_dim, cfg.encoder, &mut rng)?;
    let mut adam = AdamState::new(&params);
    let mut pool = weak.to_vec();
    for _ in 0..cfg.pretrain_epochs {
        run_one_epoch(&mut pool, &mut params, &mut adam, cfg, &mut rng)?;
    }
    Ok(params)
}

/// Fine-tuning outcome: best-epoch parameters plus the early-stopping
/// bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct FinetuneResult {
    pub params: ModelParams,
    pub best_val_loss: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

/// Fine-tunes `init` on the training split, monitoring mean loss on the
/// validation split after every epoch. Stops early per
/// [`train_with_early_stopping`] and returns the best-epoch snapshot.
pub fn finetune(
    train: &[LabeledSequence],
    val: &[LabeledSequence],
    init: ModelParams,
    cfg: &TrainConfig,
) -> Result<FinetuneResult> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::EmptySplit("training"));
    }
    if val.is_empty() {
        return Err(Error::EmptySplit("validation"));
    }
    // A distinct stream from pre-training, so the two stages do not replay
    // the same shuffles.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut params = init;
    let mut adam = AdamState::new(&params);
    let mut pool = train.to_vec();

    let outcome = train_with_early_stopping(cfg.max_finetune_epochs, cfg.patience, |_epoch| {
        run_one_epoch(&mut pool, &mut params, &mut adam, cfg, &mut rng)?;
        let val_loss = loss(val, &params)?;
        Ok((params.clone(), val_loss))
    })?;

    Ok(FinetuneResult {
        params: outcome.best,
        best_val_loss: outcome.best_val_loss,
        best_epoch: outcome.best_epoch,
        epochs_run: outcome.epochs_run,
    })
}

/// Splits sequences into (train, validation) with a seeded shuffle. The
/// validation side gets `round(n * val_fraction)` items, clamped so both
/// sides stay non-empty; within each side the original order is kept.
pub fn split_validation(
    seqs: &[LabeledSequence],
    val_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledSequence>, Vec<LabeledSequence>)> {
    if !(val_fraction > 0.0 && val_fraction < 1.0) {
        return Err(Error::InvalidConfig(
            "val_fraction must lie in (0, 1)".to_string(),
        ));
    }
    if seqs.len() < 2 {
        return Err(Error::EmptySplit("validation"));
    }
    let n = seqs.len();
    let n_val = ((n as f64 * val_fraction).round() as usize).clamp(1, n - 1);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let mut val_idx: Vec<usize> = indices[..n_val].to_vec();
    let mut train_idx: Vec<usize> = indices[n_val..].to_vec();
    val_idx.sort_unstable();
    train_idx.sort_unstable();
    let take = |idx: &[usize]| idx.iter().map(|&i| seqs[i].clone()).collect();
    Ok((take(&train_idx), take(&val_idx)))
}

/// A scored sentence: decision plus the biased-class probability.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Prediction {
    pub label: SentenceLabel,
    pub p_biased: f64,
}

/// Scores raw text. The decision rule is `Biased` iff p_biased > 0.5; an
/// exact tie goes to `NonBiased`.
pub fn predict(text: &str, vocab: &Vocabulary, params: &ModelParams) -> Result<Prediction> {
    let tokens = vocab.encode(text);
    let probs = forward(&tokens, params)?;
    let label = if probs[1] > 0.5 {
        SentenceLabel::Biased
    } else {
        SentenceLabel::NonBiased
    };
    Ok(Prediction {
        label,
        p_biased: probs[1],
    })
}

/// Everything produced by a full two-stage run.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageOutcome {
    pub vocabulary: Vocabulary,
    pub params: ModelParams,
    /// Whether a pre-training stage actually ran (a non-empty weak corpus).
    pub pretrained: bool,
    pub best_val_loss: f64,
    pub best_epoch: usize,
    pub epochs_run: usize,
}

/// Two-stage protocol driver: build the vocabulary over weak plus gold
/// training text, pre-train on the weak corpus (skipped when it is empty),
/// split off a validation set, fine-tune with early stopping.
pub fn train_two_stage(
    weak: &[(&str, bool)],
    gold_train: &[(&str, bool)],
    cfg: &TrainConfig,
) -> Result<TwoStageOutcome> {
    cfg.validate()?;
    if gold_train.is_empty() {
        return Err(Error::EmptySplit("training"));
    }
    let vocabulary = Vocabulary::build(
        weak.iter().chain(gold_train).map(|(text, _)| *text),
        cfg.min_freq,
    );
    let encode = |pairs: &[(&str, bool)]| -> Vec<LabeledSequence> {
        pairs
            .iter()
            .map(|&(text, biased)| LabeledSequence {
                tokens: vocabulary.encode(text),
                biased,
            })
            .collect()
    };
    let weak_seqs = encode(weak);
    let gold_seqs = encode(gold_train);

    let init = if weak_seqs.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        ModelParams::init(vocabulary.len(), cfg.embed_dim, cfg.encoder, &mut rng)?
    } else {
        pretrain(&weak_seqs, vocabulary.len(), cfg)?
    };

    let (train, val) = split_validation(&gold_seqs, cfg.val_fraction, cfg.seed)?;
    let ft = finetune(&train, &val, init, cfg)?;
    Ok(TwoStageOutcome {
        vocabulary,
        params: ft.params,
        pretrained: !weak_seqs.is_empty(),
        best_val_loss: ft.best_val_loss,
        best_epoch: ft.best_epoch,
        epochs_run: ft.epochs_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Encoder;

    #[test]
    fn scripted_losses_restore_the_best_epoch() {
        let losses = [0.6, 0.5, 0.55, 0.56];
        let outcome =
            train_with_early_stopping(10, 2, |epoch| Ok((epoch, losses[epoch - 1]))).unwrap();
        assert_eq!(outcome.epochs_run, 4);
        assert_eq!(outcome.best_epoch, 2);
        assert_eq!(outcome.best, 2);
        assert_eq!(outcome.best_val_loss, 0.5);
    }

    #[test]
    fn monotone_losses_run_to_the_cap() {
        let outcome =
            train_with_early_stopping(5, 2, |epoch| Ok((epoch, 1.0 / epoch as f64))).unwrap();
        assert_eq!(outcome.epochs_run, 5);
        assert_eq!(outcome.best_epoch, 5);
        assert_eq!(outcome.best, 5);
    }

    #[test]
    fn plateaus_count_against_patience() {
        // strict improvement required: equal losses trigger the stop
        let outcome = train_with_early_stopping(10, 2, |epoch| Ok((epoch, 0.4))).unwrap();
        assert_eq!(outcome.epochs_run, 3);
        assert_eq!(outcome.best_epoch, 1);
    }

    fn toy_corpus() -> Vec<LabeledSequence> {
        // token 2 marks biased items, token 3 neutral ones
        (0..40)
            .map(|i| {
                let biased = i % 2 == 0;
                LabeledSequence {
                    tokens: vec![if biased { 2 } else { 3 }, 4 + (i % 3)],
                    biased,
                }
            })
            .collect()
    }

    fn fast_cfg() -> TrainConfig {
        TrainConfig {
            batch_size: 8,
            learning_rate: 0.05,
            max_finetune_epochs: 12,
            embed_dim: 8,
            seed: 13,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn pretraining_is_deterministic_and_epoch_zero_is_identity() {
        let corpus = toy_corpus();
        let cfg = fast_cfg();
        let a = pretrain(&corpus, 8, &cfg).unwrap();
        let b = pretrain(&corpus, 8, &cfg).unwrap();
        assert_eq!(a, b);

        let frozen = TrainConfig {
            pretrain_epochs: 0,
            ..cfg.clone()
        };
        let untouched = pretrain(&corpus, 8, &frozen).unwrap();
        let again = pretrain(&corpus, 8, &frozen).unwrap();
        assert_eq!(untouched, again);
        assert_ne!(untouched, a, "a training epoch must move the parameters");
        assert!(matches!(pretrain(&[], 8, &cfg), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn finetuning_learns_a_separable_toy_problem() {
        let corpus = toy_corpus();
        let cfg = fast_cfg();
        let (train, val) = split_validation(&corpus, 0.2, cfg.seed).unwrap();
        let init = pretrain(
            &train,
            8,
            &TrainConfig {
                pretrain_epochs: 0,
                ..cfg.clone()
            },
        )
        .unwrap();
        let before = loss(&val, &init).unwrap();
        let result = finetune(&train, &val, init, &cfg).unwrap();
        assert!(
            result.best_val_loss < before,
            "validation loss did not improve: {} -> {}",
            before,
            result.best_val_loss
        );
        assert!(result.best_epoch <= result.epochs_run);

        // determinism end to end
        let (train2, val2) = split_validation(&corpus, 0.2, cfg.seed).unwrap();
        let init2 = pretrain(
            &train2,
            8,
            &TrainConfig {
                pretrain_epochs: 0,
                ..cfg.clone()
            },
        )
        .unwrap();
        let result2 = finetune(&train2, &val2, init2, &cfg).unwrap();
        assert_eq!(result.params, result2.params);
    }

    #[test]
    fn validation_split_is_seeded_and_disjoint() {
        let corpus = toy_corpus();
        let (train, val) = split_validation(&corpus, 0.25, 42).unwrap();
        assert_eq!(train.len() + val.len(), corpus.len());
        assert_eq!(val.len(), 10);
        let (train2, val2) = split_validation(&corpus, 0.25, 42).unwrap();
        assert_eq!(train, train2);
        assert_eq!(val, val2);
        let (_, val3) = split_validation(&corpus, 0.25, 43).unwrap();
        assert_ne!(val, val3, "different seeds should split differently");
        assert!(split_validation(&corpus[..1], 0.25, 1).is_err());
    }

    #[test]
    fn prediction_tie_breaks_to_non_biased() {
        let vocab = Vocabulary::build(["the vote the vote"], 2);
        let params = ModelParams {
            encoder: Encoder::MeanPool,
            embed_dim: 2,
            embeddings: vec![0.0; vocab.len() * 2],
            query: vec![0.0; 2],
            head_w: vec![0.0; 4],
            head_b: [0.0; 2],
        };
        let pred = predict("the vote", &vocab, &params).unwrap();
        assert_eq!(pred.label, SentenceLabel::NonBiased);
        assert_eq!(pred.p_biased, 0.5);
    }

    #[test]
    fn prediction_ignores_surrounding_whitespace() {
        let weak: Vec<(&str, bool)> = vec![
            ("utterly absurd claim repeated", true),
            ("utterly absurd stunt repeated", true),
            ("quiet steady report issued", false),
            ("quiet steady update issued", false),
        ];
        let gold = weak.clone();
        let cfg = TrainConfig {
            batch_size: 2,
            learning_rate: 0.05,
            max_finetune_epochs: 6,
            embed_dim: 4,
            val_fraction: 0.25,
            min_freq: 1,
            seed: 3,
            ..TrainConfig::default()
        };
        let outcome = train_two_stage(&weak, &gold, &cfg).unwrap();
        let a = predict("utterly absurd claim", &outcome.vocabulary, &outcome.params).unwrap();
        let b = predict(
            "  utterly absurd claim \n",
            &outcome.vocabulary,
            &outcome.params,
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_stage_runs_are_reproducible() {
        let weak: Vec<(&str, bool)> = (0..30)
            .map(|i| {
                if i % 2 == 0 {
                    ("grim spiral deepens fast", true)
                } else {
                    ("council meets again today", false)
                }
            })
            .collect();
        let gold: Vec<(&str, bool)> = (0..20)
            .map(|i| {
                if i % 2 == 0 {
                    ("grim spiral returns fast", true)
                } else {
                    ("council meets once more", false)
                }
            })
            .collect();
        let cfg = TrainConfig {
            batch_size: 4,
            learning_rate: 0.05,
            max_finetune_epochs: 5,
            embed_dim: 6,
            seed: 11,
            ..TrainConfig::default()
        };
        let a = train_two_stage(&weak, &gold, &cfg).unwrap();
        let b = train_two_stage(&weak, &gold, &cfg).unwrap();
        assert_eq!(a.params, b.params);
        assert!(a.pretrained);
        let only_ft = train_two_stage(&[], &gold, &cfg).unwrap();
        assert!(!only_ft.pretrained);
    }
}
