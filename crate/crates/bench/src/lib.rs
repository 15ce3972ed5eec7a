//! Deterministic input builders shared by the benchmarks. Everything is
//! seeded so successive benchmark runs measure the same workload.

use biaslab_core::agreement::ReliabilityMatrix;
use biaslab_core::corpus::{
    GoldStore, HeadlineRecord, OpinionLabel, OutletLeaning, RaterAnnotation, SentenceLabel,
    SentenceRecord, SourceSet,
};
use biaslab_core::synthetic::{generate, SyntheticConfig, SyntheticCorpus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reliability matrix with the given shape, ~5% missing cells, and a
/// binary alphabet.
pub fn reliability_matrix(n_items: usize, n_raters: usize, seed: u64) -> ReliabilityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n_items)
        .map(|_| {
            (0..n_raters)
                .map(|_| {
                    if rng.random_bool(0.05) {
                        None
                    } else {
                        Some(rng.random_range(0..2u32))
                    }
                })
                .collect()
        })
        .collect();
    ReliabilityMatrix::from_rows(rows).expect("generated matrix is well-formed")
}

/// A gold store of `n` sentences, three raters each, with word spans on the
/// biased ones — shaped like a real annotation export.
pub fn gold_store(n: usize, seed: u64) -> GoldStore {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sentences = Vec::with_capacity(n);
    let mut annotations = Vec::new();
    for i in 0..n {
        let biased = rng.random_bool(0.45);
        let text = if biased {
            format!("Critics called proposal number {i} a reckless and shameful scheme.")
        } else {
            format!("The committee reviewed proposal number {i} on Tuesday morning.")
        };
        let id = format!("s{i:05}");
        sentences.push(SentenceRecord {
            id: id.clone(),
            text: text.clone(),
            outlet: "outlet".to_string(),
            topic: "topic".to_string(),
            source_set: SourceSet::Sg2Ext,
        });
        for r in 0..3 {
            let spans = if biased && r < 2 {
                let start = text.find("reckless").unwrap();
                vec![(start, start + "reckless".len())]
            } else {
                Vec::new()
            };
            annotations.push(RaterAnnotation {
                rater_id: format!("r{r}"),
                sentence_id: id.clone(),
                sentence_label: if biased {
                    SentenceLabel::Biased
                } else {
                    SentenceLabel::NonBiased
                },
                opinion_label: if biased {
                    OpinionLabel::Opinionated
                } else {
                    OpinionLabel::Factual
                },
                biased_spans: spans,
            });
        }
    }
    GoldStore::new(sentences, annotations).expect("generated store is valid")
}

/// Headlines plus matching leanings for the weak-corpus builder.
pub fn headline_corpus(n: usize, seed: u64) -> (Vec<HeadlineRecord>, Vec<OutletLeaning>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outlets = ["wire-a", "wire-b", "herald-left", "herald-right"];
    let headlines = (0..n)
        .map(|i| {
            let outlet = outlets[rng.random_range(0..outlets.len())];
            HeadlineRecord {
                id: format!("h{i:06}"),
                text: format!(
                    "Headline number {i} about measure {}",
                    rng.random_range(0..50)
                ),
                outlet: outlet.to_string(),
            }
        })
        .collect();
    let leanings = vec![
        OutletLeaning {
            outlet: "wire-a".to_string(),
            leaning: biaslab_core::corpus::Leaning::Center,
        },
        OutletLeaning {
            outlet: "wire-b".to_string(),
            leaning: biaslab_core::corpus::Leaning::Center,
        },
        OutletLeaning {
            outlet: "herald-left".to_string(),
            leaning: biaslab_core::corpus::Leaning::Left,
        },
        OutletLeaning {
            outlet: "herald-right".to_string(),
            leaning: biaslab_core::corpus::Leaning::Right,
        },
    ];
    (headlines, leanings)
}

/// A small synthetic weak/gold pair for training benchmarks.
pub fn training_corpus(n_weak: usize, n_gold: usize) -> SyntheticCorpus {
    generate(&SyntheticConfig {
        n_weak,
        n_gold,
        seed: 99,
        ..SyntheticConfig::default()
    })
    .expect("synthetic config is valid")
}
