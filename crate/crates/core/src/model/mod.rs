//! From-scratch trainable sentence classifier.
//!
//! The network is deliberately small enough to verify by hand: token
//! embeddings, a pooled sentence vector (mean or single-query
//! self-attention), and a two-class linear head trained with softmax
//! cross-entropy and Adam. Gradients are derived analytically and checked
//! against central finite differences in the test suites.
//!
//! Training follows a two-stage protocol: one (configurable) epoch over the
//! weakly labeled corpus, then fine-tuning on gold data with early stopping
//! on a held-out validation split and best-epoch restore.

pub mod checkpoint;
mod net;
mod optim;
mod train;
mod vocab;

pub use net::{forward, gradients, loss, max_relative_gradient_error, Gradients, ModelParams};
pub use optim::{adam_step, AdamState};
pub use train::{
    finetune, predict, pretrain, split_validation, train_two_stage, train_with_early_stopping,
    EpochOutcome, FinetuneResult, Prediction, TwoStageOutcome,
};
pub use vocab::{Vocabulary, PAD, UNK};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How token embeddings are pooled into one sentence vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Encoder {
    #[default]
    MeanPool,
    SelfAttention,
}

/// Hyperparameters for both training stages.
///
/// The same settings drive pre-training and fine-tuning; only the epoch
/// budget differs. `seed` fixes the full trajectory: initialization, batch
/// shuffles, and the validation split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub pretrain_epochs: usize,
    pub max_finetune_epochs: usize,
    /// Consecutive epochs without validation-loss improvement before
    /// fine-tuning stops.
    pub patience: usize,
    pub encoder: Encoder,
    pub embed_dim: usize,
    /// Share of the fine-tuning data held out as the validation split that
    /// early stopping monitors.
    pub val_fraction: f64,
    pub min_freq: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 64,
            learning_rate: 5e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            pretrain_epochs: 1,
            max_finetune_epochs: 20,
            patience: 2,
            encoder: Encoder::MeanPool,
            embed_dim: 64,
            val_fraction: 0.1,
            min_freq: 2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Rejects configurations that would make training meaningless or
    /// non-terminating.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return fail("learning_rate must be a positive finite number");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return fail("adam betas must lie in [0, 1)");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return fail("adam epsilon must be positive");
        }
        if self.patience == 0 {
            return fail("patience must be at least 1");
        }
        if self.max_finetune_epochs == 0 {
            return fail("max_finetune_epochs must be at least 1");
        }
        if self.embed_dim == 0 {
            return fail("embed_dim must be at least 1");
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return fail("val_fraction must lie in (0, 1)");
        }
        Ok(())
    }
}

/// One encoded training example: token indices plus the binary target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSequence {
    pub tokens: Vec<usize>,
    pub biased: bool,
}

impl LabeledSequence {
    /// Class index for the loss: neutral = 0, biased = 1.
    pub(crate) fn class(&self) -> usize {
        usize::from(self.biased)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        TrainConfig::default().validate().unwrap();
    }

    #[test]
    fn bad_configs_are_rejected() {
        let broken = [
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                patience: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                val_fraction: 1.0,
                ..TrainConfig::default()
            },
        ];
        for cfg in broken {
            assert!(cfg.validate().is_err(), "accepted: {cfg:?}");
        }
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = TrainConfig {
            encoder: Encoder::SelfAttention,
            seed: 42,
            ..TrainConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: TrainConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }
}
