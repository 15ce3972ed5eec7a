//! Inter-rater agreement: Krippendorff's alpha and Fleiss' kappa.
//!
//! Alpha is computed twice by design. [`krippendorff_alpha`] builds the
//! standard nominal coincidence matrix; [`alpha_oracle`] enumerates every
//! within-item value pair directly and serves as a brute-force cross-check.
//! The two must agree to within 1e-12 on any valid input.

use std::collections::BTreeMap;

use crate::corpus::{GoldStore, OpinionLabel, SentenceLabel};
use crate::error::{Error, Result};

/// Items-by-raters grid of optional nominal labels.
///
/// Rows are items, columns raters; `None` marks a missing rating. Labels
/// are arbitrary `u32` codes — only equality matters for nominal data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReliabilityMatrix {
    rows: Vec<Vec<Option<u32>>>,
    n_raters: usize,
}

impl ReliabilityMatrix {
    /// Builds a matrix from rectangular rows of optional label codes.
    pub fn from_rows(rows: Vec<Vec<Option<u32>>>) -> Result<Self> {
        let n_raters = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_raters) {
            return Err(Error::ShapeMismatch(format!(
                "ragged reliability matrix: expected {n_raters} raters per item, found a row \
                 with {}",
                bad.len()
            )));
        }
        Ok(ReliabilityMatrix { rows, n_raters })
    }

    /// Builds a matrix from arbitrary nominal labels, coding each distinct
    /// label in sorted order.
    pub fn from_labels<L: Ord + Clone>(rows: &[Vec<Option<L>>]) -> Result<Self> {
        let mut codes = BTreeMap::new();
        for row in rows {
            for label in row.iter().flatten() {
                let next = codes.len() as u32;
                codes.entry(label.clone()).or_insert(next);
            }
        }
        let coded = rows
            .iter()
            .map(|row| row.iter().map(|l| l.as_ref().map(|l| codes[l])).collect())
            .collect();
        Self::from_rows(coded)
    }

    pub fn n_items(&self) -> usize {
        self.rows.len()
    }

    pub fn n_raters(&self) -> usize {
        self.n_raters
    }

    pub fn rows(&self) -> &[Vec<Option<u32>>] {
        &self.rows
    }

    /// Values present in an item, in rater order.
    fn item_values(&self, item: usize) -> Vec<u32> {
        self.rows[item].iter().flatten().copied().collect()
    }
}

/// Options for the alpha computation.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlphaOptions {
    /// Map the formally undefined all-one-label case to alpha = 1.0
    /// instead of returning an error.
    pub degenerate_is_unity: bool,
}

/// Alpha together with the quantities it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaResult {
    pub alpha: f64,
    /// Total pairable values: sum of m_u over items with m_u >= 2.
    pub n_pairable: usize,
    pub observed_disagreement: f64,
    pub expected_disagreement: f64,
}

/// Krippendorff's alpha for nominal data with missing values.
///
/// Each item with m_u >= 2 ratings contributes its ordered value pairs to a
/// coincidence matrix with weight 1/(m_u - 1). With o_ck the coincidence
/// counts and n_c the marginals over n pairable values:
///
/// ```text
/// D_o = (1/n) * sum_{c != k} o_ck
/// D_e = sum_{c != k} n_c * n_k / (n * (n - 1))
/// alpha = 1 - D_o / D_e
/// ```
pub fn krippendorff_alpha(matrix: &ReliabilityMatrix, opts: AlphaOptions) -> Result<AlphaResult> {
    let mut label_ids = BTreeMap::new();
    for item in 0..matrix.n_items() {
        for v in matrix.item_values(item) {
            let next = label_ids.len();
            label_ids.entry(v).or_insert(next);
        }
    }
    let k = label_ids.len();
    let mut coincidence = vec![vec![0.0f64; k]; k];
    let mut n_pairable = 0usize;

    for item in 0..matrix.n_items() {
        let values = matrix.item_values(item);
        let m_u = values.len();
        if m_u < 2 {
            continue;
        }
        n_pairable += m_u;
        let weight = 1.0 / (m_u as f64 - 1.0);
        for (i, &a) in values.iter().enumerate() {
            for (j, &b) in values.iter().enumerate() {
                if i != j {
                    coincidence[label_ids[&a]][label_ids[&b]] += weight;
                }
            }
        }
    }

    if n_pairable < 2 {
        return Err(Error::InsufficientData {
            pairable: n_pairable,
        });
    }

    let n = n_pairable as f64;
    let marginals: Vec<f64> = (0..k).map(|c| coincidence[c].iter().sum()).collect();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for l in 0..k {
            if c != l {
                observed += coincidence[c][l];
                expected += marginals[c] * marginals[l];
            }
        }
    }
    let observed_disagreement = observed / n;
    let expected_disagreement = expected / (n * (n - 1.0));

    finish_alpha(
        n_pairable,
        observed_disagreement,
        expected_disagreement,
        opts,
    )
}

/// Brute-force alpha: direct enumeration of all within-item value pairs,
/// no coincidence matrix. Serves as an independent oracle for
/// [`krippendorff_alpha`].
pub fn alpha_oracle(matrix: &ReliabilityMatrix, opts: AlphaOptions) -> Result<AlphaResult> {
    let mut pooled = Vec::new();
    let mut observed = 0.0f64;
    for item in 0..matrix.n_items() {
        let values = matrix.item_values(item);
        let m_u = values.len();
        if m_u < 2 {
            continue;
        }
        let mut disagreeing = 0usize;
        for (i, &a) in values.iter().enumerate() {
            for (j, &b) in values.iter().enumerate() {
                if i != j && a != b {
                    disagreeing += 1;
                }
            }
        }
        observed += disagreeing as f64 / (m_u as f64 - 1.0);
        pooled.extend(values);
    }

    let n_pairable = pooled.len();
    if n_pairable < 2 {
        return Err(Error::InsufficientData {
            pairable: n_pairable,
        });
    }

    let mut expected_pairs = 0usize;
    for (i, &a) in pooled.iter().enumerate() {
        for (j, &b) in pooled.iter().enumerate() {
            if i != j && a != b {
                expected_pairs += 1;
            }
        }
    }
    let n = n_pairable as f64;
    let observed_disagreement = observed / n;
    let expected_disagreement = expected_pairs as f64 / (n * (n - 1.0));

    finish_alpha(
        n_pairable,
        observed_disagreement,
        expected_disagreement,
        opts,
    )
}

fn finish_alpha(
    n_pairable: usize,
    observed_disagreement: f64,
    expected_disagreement: f64,
    opts: AlphaOptions,
) -> Result<AlphaResult> {
    if expected_disagreement == 0.0 {
        if opts.degenerate_is_unity {
            return Ok(AlphaResult {
                alpha: 1.0,
                n_pairable,
                observed_disagreement,
                expected_disagreement,
            });
        }
        return Err(Error::UndefinedAlpha);
    }
    Ok(AlphaResult {
        alpha: 1.0 - observed_disagreement / expected_disagreement,
        n_pairable,
        observed_disagreement,
        expected_disagreement,
    })
}

/// Fleiss' kappa for complete data: every item rated by every rater.
///
/// With N items, n raters, and n_ij the count of raters assigning category
/// j to item i: P_i = (sum_j n_ij^2 - n) / (n(n-1)), p_j the category
/// shares, and kappa = (mean P_i - sum p_j^2) / (1 - sum p_j^2).
pub fn fleiss_kappa(matrix: &ReliabilityMatrix) -> Result<f64> {
    if matrix.n_items() == 0 {
        return Err(Error::EmptyInput("reliability matrix"));
    }
    let n_raters = matrix.n_raters();
    if n_raters < 2 {
        return Err(Error::IncompleteMatrix(format!(
            "fleiss' kappa needs at least 2 raters, got {n_raters}"
        )));
    }
    if let Some(item) = (0..matrix.n_items()).find(|&i| matrix.item_values(i).len() != n_raters) {
        return Err(Error::IncompleteMatrix(format!(
            "fleiss' kappa needs complete data; item {item} is missing ratings"
        )));
    }

    let mut label_ids = BTreeMap::new();
    for i in 0..matrix.n_items() {
        for v in matrix.item_values(i) {
            let next = label_ids.len();
            label_ids.entry(v).or_insert(next);
        }
    }
    let k = label_ids.len();
    let n_items = matrix.n_items() as f64;
    let n = n_raters as f64;

    let mut category_totals = vec![0.0f64; k];
    let mut mean_item_agreement = 0.0;
    for i in 0..matrix.n_items() {
        let mut counts = vec![0.0f64; k];
        for v in matrix.item_values(i) {
            counts[label_ids[&v]] += 1.0;
        }
        let sum_sq: f64 = counts.iter().map(|c| c * c).sum();
        mean_item_agreement += (sum_sq - n) / (n * (n - 1.0));
        for (j, c) in counts.iter().enumerate() {
            category_totals[j] += c;
        }
    }
    mean_item_agreement /= n_items;

    let chance: f64 = category_totals
        .iter()
        .map(|t| {
            let p = t / (n_items * n);
            p * p
        })
        .sum();
    if chance == 1.0 {
        return Err(Error::UndefinedAlpha);
    }
    Ok((mean_item_agreement - chance) / (1.0 - chance))
}

/// Which per-rater label to extract when building a matrix from a store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgreementTarget {
    Bias,
    Opinion,
}

/// Builds a reliability matrix from a gold store: one row per sentence (in
/// load order), one column per rater (in sorted id order).
pub fn matrix_from_store(store: &GoldStore, target: AgreementTarget) -> Result<ReliabilityMatrix> {
    let mut rater_cols = BTreeMap::new();
    for ann in store.annotations() {
        let next = rater_cols.len();
        rater_cols.entry(ann.rater_id.as_str()).or_insert(next);
    }
    let n_raters = rater_cols.len();
    let mut rows = vec![vec![None; n_raters]; store.sentences().len()];
    let row_of: BTreeMap<&str, usize> = store
        .sentences()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id.as_str(), i))
        .collect();
    for ann in store.annotations() {
        let code = match target {
            AgreementTarget::Bias => match ann.sentence_label {
                SentenceLabel::NonBiased => 0,
                SentenceLabel::Biased => 1,
            },
            AgreementTarget::Opinion => match ann.opinion_label {
                OpinionLabel::Opinionated => 0,
                OpinionLabel::Factual => 1,
                OpinionLabel::Mixed => 2,
            },
        };
        rows[row_of[ann.sentence_id.as_str()]][rater_cols[ann.rater_id.as_str()]] = Some(code);
    }
    ReliabilityMatrix::from_rows(rows)
}
