//! Majority-vote aggregation of per-rater annotations into gold labels.
//!
//! Three rules, applied per sentence:
//!
//! - **Bias**: a label wins with a strict majority, `floor(n/2) + 1` votes.
//!   An exact tie (even panels only) yields [`BiasLabel::NoAgreement`].
//! - **Opinion**: the unique plurality label wins; a tied maximum yields
//!   [`OpinionAgg::NoAgreement`].
//! - **Words**: a token is biased when at least `threshold` distinct raters
//!   marked any character of it. One rater marking a phrase twice is still
//!   one opinion, hence the distinct-rater count.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, GoldStore, OpinionLabel, RaterAnnotation, SentenceLabel, SourceSet};
use crate::error::{Error, Result};

/// Sentence-level bias decision after the majority vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BiasLabel {
    Biased,
    NonBiased,
    NoAgreement,
}

/// Sentence-level opinion decision after the plurality vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpinionAgg {
    Opinionated,
    Factual,
    Mixed,
    NoAgreement,
}

/// A token that met the biased-word threshold, with offsets into the
/// original (un-normalized) sentence text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BiasedWord {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// Aggregated gold record for one sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub sentence_id: String,
    pub bias: BiasLabel,
    pub opinion: OpinionAgg,
    pub biased_words: Vec<BiasedWord>,
    pub n_raters: usize,
}

/// Percentage shares for the three bias outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasShares {
    pub biased: f64,
    pub non_biased: f64,
    pub no_agreement: f64,
}

/// Percentage shares for the four opinion outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionShares {
    pub opinionated: f64,
    pub factual: f64,
    pub mixed: f64,
    pub no_agreement: f64,
}

/// Class-distribution summary over a set of gold labels.
///
/// Percentages are taken over all sentences, no-agreement cases included.
/// The biased-word average divides by sentences labeled `Biased` only and
/// is `None` when there are none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub n_sentences: usize,
    pub bias_pct: BiasShares,
    pub opinion_pct: OpinionShares,
    pub total_biased_words: usize,
    pub avg_biased_words_per_biased_sentence: Option<f64>,
}

/// Majority vote over sentence-level bias labels.
///
/// `Biased`/`NonBiased` require a strict majority (`floor(n/2) + 1` votes);
/// an exact tie maps to `NoAgreement`. With an odd panel one side always
/// holds a strict majority, so ties only occur for even `n_raters`.
pub fn aggregate_bias(votes: &[SentenceLabel], n_raters: usize) -> Result<BiasLabel> {
    if votes.len() != n_raters {
        return Err(Error::VoteCountMismatch {
            got: votes.len(),
            expected: n_raters,
        });
    }
    if n_raters == 0 {
        return Err(Error::EmptyInput("bias votes"));
    }
    let biased = votes
        .iter()
        .filter(|v| **v == SentenceLabel::Biased)
        .count();
    let non_biased = n_raters - biased;
    let majority = n_raters / 2 + 1;
    Ok(if biased >= majority {
        BiasLabel::Biased
    } else if non_biased >= majority {
        BiasLabel::NonBiased
    } else {
        BiasLabel::NoAgreement
    })
}

/// Plurality vote over opinion labels; a tied maximum is `NoAgreement`.
pub fn aggregate_opinion(votes: &[OpinionLabel]) -> Result<OpinionAgg> {
    if votes.is_empty() {
        return Err(Error::EmptyInput("opinion votes"));
    }
    let mut counts = [0usize; 3];
    for v in votes {
        let slot = match v {
            OpinionLabel::Opinionated => 0,
            OpinionLabel::Factual => 1,
            OpinionLabel::Mixed => 2,
        };
        counts[slot] += 1;
    }
    let max = *counts.iter().max().expect("three slots");
    let winners = counts.iter().filter(|&&c| c == max).count();
    if winners > 1 {
        return Ok(OpinionAgg::NoAgreement);
    }
    Ok(
        match counts.iter().position(|&c| c == max).expect("max exists") {
            0 => OpinionAgg::Opinionated,
            1 => OpinionAgg::Factual,
            _ => OpinionAgg::Mixed,
        },
    )
}

/// Collects the tokens of `text` marked by at least `threshold` distinct
/// raters. Span/token overlap is counted at character granularity: a rater
/// covers a token if any of their spans touches any character of it.
pub fn aggregate_words(
    text: &str,
    annotations: &[&RaterAnnotation],
    threshold: usize,
) -> Result<Vec<BiasedWord>> {
    if threshold == 0 {
        return Err(Error::InvalidConfig(
            "word threshold must be at least 1".to_string(),
        ));
    }
    if let Some(first) = annotations.first() {
        for ann in &annotations[1..] {
            if ann.sentence_id != first.sentence_id {
                return Err(Error::MixedSentences {
                    first: first.sentence_id.clone(),
                    second: ann.sentence_id.clone(),
                });
            }
        }
    }
    let tokens = tokenize(text);
    let mut words = Vec::new();
    for token in tokens {
        let mut raters = BTreeSet::new();
        for ann in annotations {
            let covers = ann
                .biased_spans
                .iter()
                .any(|&(s, e)| s < token.char_end && token.char_start < e);
            if covers {
                raters.insert(ann.rater_id.as_str());
            }
        }
        if raters.len() >= threshold {
            words.push(BiasedWord {
                surface: token.surface,
                char_start: token.char_start,
                char_end: token.char_end,
            });
        }
    }
    Ok(words)
}

/// Default biased-word threshold for a source set: 3 for the expert panel
/// (SG1), 2 everywhere else.
pub fn default_word_threshold(source_set: SourceSet) -> usize {
    match source_set {
        SourceSet::Sg1 => 3,
        SourceSet::Sg2Ext | SourceSet::Mbic | SourceSet::Other => 2,
    }
}

/// Aggregates every annotated sentence in a store.
///
/// `word_threshold` overrides the per-source default when given. Sentences
/// without any annotations are skipped: no panel, no gold label.
pub fn aggregate_store(store: &GoldStore, word_threshold: Option<usize>) -> Result<Vec<GoldLabel>> {
    let mut gold = Vec::new();
    for sentence in store.sentences() {
        let annotations = store.annotations_for(&sentence.id);
        if annotations.is_empty() {
            continue;
        }
        let bias_votes: Vec<SentenceLabel> = annotations.iter().map(|a| a.sentence_label).collect();
        let opinion_votes: Vec<OpinionLabel> =
            annotations.iter().map(|a| a.opinion_label).collect();
        let threshold =
            word_threshold.unwrap_or_else(|| default_word_threshold(sentence.source_set));
        gold.push(GoldLabel {
            sentence_id: sentence.id.clone(),
            bias: aggregate_bias(&bias_votes, annotations.len())?,
            opinion: aggregate_opinion(&opinion_votes)?,
            biased_words: aggregate_words(&sentence.text, &annotations, threshold)?,
            n_raters: annotations.len(),
        });
    }
    Ok(gold)
}

/// Computes the class-distribution report for a set of gold labels.
pub fn distribution(gold: &[GoldLabel]) -> Result<DistributionReport> {
    if gold.is_empty() {
        return Err(Error::EmptyInput("gold labels"));
    }
    let n = gold.len() as f64;
    let pct = |count: usize| 100.0 * count as f64 / n;
    let bias_count = |b: BiasLabel| gold.iter().filter(|g| g.bias == b).count();
    let op_count = |o: OpinionAgg| gold.iter().filter(|g| g.opinion == o).count();

    let n_biased = bias_count(BiasLabel::Biased);
    let words_in_biased: usize = gold
        .iter()
        .filter(|g| g.bias == BiasLabel::Biased)
        .map(|g| g.biased_words.len())
        .sum();
    let avg = (n_biased > 0).then(|| words_in_biased as f64 / n_biased as f64);

    Ok(DistributionReport {
        n_sentences: gold.len(),
        bias_pct: BiasShares {
            biased: pct(n_biased),
            non_biased: pct(bias_count(BiasLabel::NonBiased)),
            no_agreement: pct(bias_count(BiasLabel::NoAgreement)),
        },
        opinion_pct: OpinionShares {
            opinionated: pct(op_count(OpinionAgg::Opinionated)),
            factual: pct(op_count(OpinionAgg::Factual)),
            mixed: pct(op_count(OpinionAgg::Mixed)),
            no_agreement: pct(op_count(OpinionAgg::NoAgreement)),
        },
        total_biased_words: gold.iter().map(|g| g.biased_words.len()).sum(),
        avg_biased_words_per_biased_sentence: avg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::OpinionLabel as Op;
    use crate::corpus::SentenceLabel as S;

    fn votes(biased: usize, non_biased: usize) -> Vec<S> {
        let mut v = vec![S::Biased; biased];
        v.extend(vec![S::NonBiased; non_biased]);
        v
    }

    #[test]
    fn strict_majority_of_eight() {
        assert_eq!(aggregate_bias(&votes(6, 2), 8).unwrap(), BiasLabel::Biased);
        assert_eq!(aggregate_bias(&votes(5, 3), 8).unwrap(), BiasLabel::Biased);
        assert_eq!(
            aggregate_bias(&votes(4, 4), 8).unwrap(),
            BiasLabel::NoAgreement
        );
        assert_eq!(
            aggregate_bias(&votes(3, 5), 8).unwrap(),
            BiasLabel::NonBiased
        );
    }

    #[test]
    fn odd_panels_always_decide() {
        for biased in 0..=5 {
            let got = aggregate_bias(&votes(biased, 5 - biased), 5).unwrap();
            let want = if biased >= 3 {
                BiasLabel::Biased
            } else {
                BiasLabel::NonBiased
            };
            assert_eq!(got, want, "{biased} of 5");
        }
    }

    #[test]
    fn vote_count_mismatch_is_rejected() {
        assert!(matches!(
            aggregate_bias(&votes(2, 2), 5),
            Err(Error::VoteCountMismatch {
                got: 4,
                expected: 5
            })
        ));
        assert!(matches!(aggregate_bias(&[], 0), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn adding_a_biased_vote_never_flips_away_from_biased() {
        for n in 1..=9usize {
            for biased in 0..=n {
                let before = aggregate_bias(&votes(biased, n - biased), n).unwrap();
                let after = aggregate_bias(&votes(biased + 1, n - biased), n + 1).unwrap();
                if before == BiasLabel::Biased {
                    assert_eq!(after, BiasLabel::Biased);
                }
            }
        }
    }

    #[test]
    fn opinion_plurality_and_ties() {
        let mut v = vec![Op::Factual; 3];
        v.extend([Op::Mixed, Op::Opinionated]);
        assert_eq!(aggregate_opinion(&v).unwrap(), OpinionAgg::Factual);

        let tied = [
            Op::Opinionated,
            Op::Opinionated,
            Op::Factual,
            Op::Factual,
            Op::Mixed,
        ];
        assert_eq!(aggregate_opinion(&tied).unwrap(), OpinionAgg::NoAgreement);

        let unanimous = vec![Op::Opinionated; 5];
        assert_eq!(
            aggregate_opinion(&unanimous).unwrap(),
            OpinionAgg::Opinionated
        );

        assert!(matches!(aggregate_opinion(&[]), Err(Error::EmptyInput(_))));
    }

    fn ann(rater: &str, spans: &[(usize, usize)]) -> RaterAnnotation {
        RaterAnnotation {
            rater_id: rater.to_string(),
            sentence_id: "s1".to_string(),
            sentence_label: S::Biased,
            opinion_label: Op::Opinionated,
            biased_spans: spans.to_vec(),
        }
    }

    /// Five raters over "the radical extremist scheme collapsed":
    /// tokens at [0,3) [4,11) [12,21) [22,28) [29,38).
    fn five_rater_fixture() -> (String, Vec<RaterAnnotation>) {
        let text = "the radical extremist scheme collapsed".to_string();
        let anns = vec![
            ann("r1", &[(4, 21)]),           // radical extremist
            ann("r2", &[(4, 11), (12, 21)]), // radical, extremist
            ann("r3", &[(4, 11)]),           // radical
            ann("r4", &[(12, 28)]),          // extremist scheme
            ann("r5", &[]),
        ];
        (text, anns)
    }

    #[test]
    fn word_threshold_counts_distinct_raters() {
        let (text, anns) = five_rater_fixture();
        let refs: Vec<&RaterAnnotation> = anns.iter().collect();
        // coverage counts: the 0, radical 3, extremist 3, scheme 1, collapsed 0
        let at3 = aggregate_words(&text, &refs, 3).unwrap();
        let surfaces: Vec<&str> = at3.iter().map(|w| w.surface.as_str()).collect();
        assert_eq!(surfaces, ["radical", "extremist"]);
        assert_eq!(at3[0].char_start, 4);
        assert_eq!(at3[0].char_end, 11);

        let at1 = aggregate_words(&text, &refs, 1).unwrap();
        let surfaces: Vec<&str> = at1.iter().map(|w| w.surface.as_str()).collect();
        assert_eq!(surfaces, ["radical", "extremist", "scheme"]);
    }

    #[test]
    fn word_sets_shrink_as_threshold_grows() {
        let (text, anns) = five_rater_fixture();
        let refs: Vec<&RaterAnnotation> = anns.iter().collect();
        let mut prev = aggregate_words(&text, &refs, 1).unwrap();
        for t in 2..=6 {
            let cur = aggregate_words(&text, &refs, t).unwrap();
            assert!(cur.iter().all(|w| prev.contains(w)), "threshold {t}");
            prev = cur;
        }
        assert!(prev.is_empty());
    }

    #[test]
    fn one_rater_marking_twice_counts_once() {
        let text = "utterly radical plan";
        let double = ann("r1", &[(0, 7), (8, 15)]);
        let refs = [&double];
        assert!(aggregate_words(text, &refs, 2).unwrap().is_empty());
        let surfaces: Vec<String> = aggregate_words(text, &refs, 1)
            .unwrap()
            .into_iter()
            .map(|w| w.surface)
            .collect();
        assert_eq!(surfaces, ["utterly", "radical"]);
    }

    #[test]
    fn mixed_sentences_are_rejected() {
        let a = ann("r1", &[]);
        let mut b = ann("r2", &[]);
        b.sentence_id = "s2".to_string();
        let refs = [&a, &b];
        assert!(matches!(
            aggregate_words("text", &refs, 1),
            Err(Error::MixedSentences { .. })
        ));
    }

    #[test]
    fn singleton_distribution() {
        let gold = vec![GoldLabel {
            sentence_id: "s1".to_string(),
            bias: BiasLabel::Biased,
            opinion: OpinionAgg::Opinionated,
            biased_words: vec![
                BiasedWord {
                    surface: "radical".to_string(),
                    char_start: 0,
                    char_end: 7,
                },
                BiasedWord {
                    surface: "scheme".to_string(),
                    char_start: 8,
                    char_end: 14,
                },
            ],
            n_raters: 5,
        }];
        let report = distribution(&gold).unwrap();
        assert_eq!(report.n_sentences, 1);
        assert_eq!(report.bias_pct.biased, 100.0);
        assert_eq!(report.bias_pct.non_biased, 0.0);
        assert_eq!(report.total_biased_words, 2);
        assert_eq!(report.avg_biased_words_per_biased_sentence, Some(2.0));
        assert!(matches!(distribution(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn percentages_sum_to_one_hundred() {
        let mk = |bias, opinion| GoldLabel {
            sentence_id: String::new(),
            bias,
            opinion,
            biased_words: Vec::new(),
            n_raters: 8,
        };
        let gold = vec![
            mk(BiasLabel::Biased, OpinionAgg::Opinionated),
            mk(BiasLabel::NonBiased, OpinionAgg::Factual),
            mk(BiasLabel::NonBiased, OpinionAgg::Mixed),
            mk(BiasLabel::NoAgreement, OpinionAgg::NoAgreement),
            mk(BiasLabel::Biased, OpinionAgg::Factual),
            mk(BiasLabel::Biased, OpinionAgg::Factual),
            mk(BiasLabel::NonBiased, OpinionAgg::Factual),
        ];
        let r = distribution(&gold).unwrap();
        let bias_sum = r.bias_pct.biased + r.bias_pct.non_biased + r.bias_pct.no_agreement;
        let op_sum = r.opinion_pct.opinionated
            + r.opinion_pct.factual
            + r.opinion_pct.mixed
            + r.opinion_pct.no_agreement;
        assert!((bias_sum - 100.0).abs() < 1e-9);
        assert!((op_sum - 100.0).abs() < 1e-9);
        // no biased words anywhere, but biased sentences exist
        assert_eq!(r.avg_biased_words_per_biased_sentence, Some(0.0));
    }
}
