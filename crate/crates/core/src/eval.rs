//! Evaluation harness: stratified k-fold assignment, F1 scores, and
//! cross-validated reports with fold-level standard errors.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fold index per item, stratified by class.
///
/// Within each class the items are shuffled with the seeded generator and
/// dealt round-robin; the dealing cursor continues across classes so the
/// overall fold sizes also differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub seed: u64,
    folds: Vec<usize>,
}

impl FoldAssignment {
    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    pub fn n_items(&self) -> usize {
        self.folds.len()
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&i| self.folds[i] != fold)
            .collect()
    }
}

/// Stratified k-fold split over binary labels (`true` = biased).
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "cross-validation needs k >= 2, got {k}"
        )));
    }
    for class in [false, true] {
        let count = labels.iter().filter(|&&l| l == class).count();
        if count < k {
            return Err(Error::ClassTooSmall {
                class: u8::from(class),
                count,
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0usize; labels.len()];
    let mut cursor = 0usize;
    for class in [false, true] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        for item in members {
            folds[item] = cursor % k;
            cursor += 1;
        }
    }
    Ok(FoldAssignment { k, seed, folds })
}

/// Per-class, macro, and support-weighted F1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Scores {
    /// Index 0: neutral/non-biased class; index 1: biased class.
    pub per_class: [f64; 2],
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

/// F1 over binary predictions. A class with an empty precision+recall sum
/// scores 0 rather than NaN.
pub fn f1(preds: &[bool], golds: &[bool]) -> Result<F1Scores> {
    if preds.len() != golds.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: golds.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyInput("predictions"));
    }
    let mut per_class = [0.0f64; 2];
    let mut support = [0usize; 2];
    for (c, class) in [false, true].into_iter().enumerate() {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for (&p, &g) in preds.iter().zip(golds) {
            match (p == class, g == class) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
        support[c] = tp + fn_;
        let precision = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        };
        let recall = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            0.0
        };
        per_class[c] = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
    }
    let n = preds.len() as f64;
    Ok(F1Scores {
        per_class,
        macro_f1: (per_class[0] + per_class[1]) / 2.0,
        weighted_f1: (support[0] as f64 * per_class[0] + support[1] as f64 * per_class[1]) / n,
    })
}

/// One evaluation item: a stable id (shuffles key off it, so reports do not
/// depend on load order), an arbitrary payload for the trainer, and the
/// binary gold label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvItem<T> {
    pub id: String,
    pub payload: T,
    pub biased: bool,
}

/// Cross-validated scores: per-fold F1 plus mean and standard error
/// (sample standard deviation over folds divided by sqrt(k)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub n_items: usize,
    /// Sentences dropped before evaluation because the raters reached no
    /// majority; recorded by the caller for the audit trail.
    pub excluded_no_agreement: usize,
    pub fold_scores: Vec<F1Scores>,
    pub mean_macro_f1: f64,
    pub se_macro_f1: f64,
    pub mean_weighted_f1: f64,
    pub se_weighted_f1: f64,
    pub mean_per_class: [f64; 2],
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt() / k.sqrt())
}

/// Runs stratified k-fold cross-validation with a caller-supplied trainer.
///
/// The trainer receives (training items, test items) and returns one
/// prediction per test item, in order. Folds run in parallel; the report is
/// assembled in fold order, so the outcome does not depend on scheduling.
pub fn cross_validate<T, F>(
    items: &[CvItem<T>],
    k: usize,
    seed: u64,
    trainer: F,
) -> Result<CvReport>
where
    T: Sync,
    F: Fn(&[&CvItem<T>], &[&CvItem<T>]) -> Result<Vec<bool>> + Sync,
{
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[a].id.cmp(&items[b].id));
    if let Some(w) = order.windows(2).find(|w| items[w[0]].id == items[w[1]].id) {
        return Err(Error::DuplicateId {
            id: items[w[0]].id.clone(),
            kind: "cross-validation item",
        });
    }
    let sorted: Vec<&CvItem<T>> = order.iter().map(|&i| &items[i]).collect();
    let labels: Vec<bool> = sorted.iter().map(|item| item.biased).collect();
    let assignment = stratified_kfold(&labels, k, seed)?;

    let fold_scores: Vec<F1Scores> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<&CvItem<T>> = assignment
                .train_indices(fold)
                .into_iter()
                .map(|i| sorted[i])
                .collect();
            let test: Vec<&CvItem<T>> = assignment
                .test_indices(fold)
                .into_iter()
                .map(|i| sorted[i])
                .collect();
            let wrap = |source: Error| Error::FoldTrainer {
                fold,
                source: Box::new(source),
            };
            let preds = trainer(&train, &test).map_err(wrap)?;
            if preds.len() != test.len() {
                return Err(wrap(Error::LengthMismatch {
                    left: preds.len(),
                    right: test.len(),
                }));
            }
            let golds: Vec<bool> = test.iter().map(|item| item.biased).collect();
            f1(&preds, &golds).map_err(wrap)
        })
        .collect::<Result<Vec<_>>>()?;

    let macros: Vec<f64> = fold_scores.iter().map(|s| s.macro_f1).collect();
    let weighteds: Vec<f64> = fold_scores.iter().map(|s| s.weighted_f1).collect();
    let (mean_macro_f1, se_macro_f1) = mean_and_se(&macros);
    let (mean_weighted_f1, se_weighted_f1) = mean_and_se(&weighteds);
    let mean_per_class = [
        fold_scores.iter().map(|s| s.per_class[0]).sum::<f64>() / k as f64,
        fold_scores.iter().map(|s| s.per_class[1]).sum::<f64>() / k as f64,
    ];
    Ok(CvReport {
        k,
        seed,
        n_items: items.len(),
        excluded_no_agreement: 0,
        fold_scores,
        mean_macro_f1,
        se_macro_f1,
        mean_weighted_f1,
        se_weighted_f1,
        mean_per_class,
    })
}
