//! Data model and ingestion for the gold corpus, per-rater annotations,
//! headlines, and outlet metadata.
//!
//! Stores are immutable after load and safe to share read-only across
//! workers. Word spans are character offsets into the original sentence
//! text; exports that ship token indices instead are converted at load time
//! (see [`SpanEncoding`]).

mod io;
mod text;

pub use io::{
    load_gold, load_gold_with, load_headlines, load_leanings, save_gold, write_gold, GoldFormat,
    SpanEncoding,
};
pub use text::{normalize, tokenize};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which release a sentence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceSet {
    #[serde(rename = "SG1")]
    Sg1,
    #[serde(rename = "SG2_EXT")]
    Sg2Ext,
    #[serde(rename = "MBIC")]
    Mbic,
    #[serde(rename = "OTHER")]
    Other,
}

/// One corpus sentence with outlet/topic metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: String,
    pub text: String,
    pub outlet: String,
    pub topic: String,
    pub source_set: SourceSet,
}

/// Sentence-level label given by a single rater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SentenceLabel {
    Biased,
    NonBiased,
}

/// Opinion label given by a single rater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpinionLabel {
    Opinionated,
    Factual,
    Mixed,
}

/// One rater's judgment of one sentence.
///
/// `biased_spans` are half-open `(char_start, char_end)` ranges into the
/// sentence text. Overlapping spans from the same rater are merged into
/// their union during ingestion, so a stored annotation always holds
/// disjoint spans in increasing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaterAnnotation {
    pub rater_id: String,
    pub sentence_id: String,
    pub sentence_label: SentenceLabel,
    pub opinion_label: OpinionLabel,
    pub biased_spans: Vec<(usize, usize)>,
}

/// A headline used for distant supervision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadlineRecord {
    pub id: String,
    pub text: String,
    pub outlet: String,
}

/// Political leaning of a news outlet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Leaning {
    Left,
    Center,
    Right,
}

/// Leaning entry for one outlet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutletLeaning {
    pub outlet: String,
    pub leaning: Leaning,
}

/// A token produced by [`tokenize`]: the lowercased surface plus the
/// half-open character range it occupies in the original text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
}

/// Immutable collection of sentences and their annotations.
///
/// Construction validates every invariant: unique sentence ids, at most one
/// annotation per `(rater, sentence)`, spans inside the sentence, no
/// dangling sentence references, and non-empty normalized text.
#[derive(Debug, Clone, Default)]
pub struct GoldStore {
    sentences: Vec<SentenceRecord>,
    annotations: Vec<RaterAnnotation>,
    by_id: HashMap<String, usize>,
}

impl GoldStore {
    /// Validates and assembles a store from parsed records.
    pub fn new(
        sentences: Vec<SentenceRecord>,
        mut annotations: Vec<RaterAnnotation>,
    ) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(sentences.len());
        for (idx, s) in sentences.iter().enumerate() {
            if normalize(&s.text).is_empty() {
                return Err(Error::EmptyText { id: s.id.clone() });
            }
            if by_id.insert(s.id.clone(), idx).is_some() {
                return Err(Error::DuplicateId {
                    id: s.id.clone(),
                    kind: "sentence",
                });
            }
        }

        let mut seen_pairs = HashMap::new();
        for ann in &mut annotations {
            let Some(&sent_idx) = by_id.get(&ann.sentence_id) else {
                return Err(Error::DanglingSentence {
                    rater_id: ann.rater_id.clone(),
                    sentence_id: ann.sentence_id.clone(),
                });
            };
            let key = (ann.rater_id.clone(), ann.sentence_id.clone());
            if seen_pairs.insert(key, ()).is_some() {
                return Err(Error::DuplicateId {
                    id: format!("{}/{}", ann.rater_id, ann.sentence_id),
                    kind: "annotation (rater, sentence)",
                });
            }
            let len = sentences[sent_idx].text.chars().count();
            for &(start, end) in &ann.biased_spans {
                if start >= end || end > len {
                    return Err(Error::SpanOutOfBounds {
                        rater_id: ann.rater_id.clone(),
                        sentence_id: ann.sentence_id.clone(),
                        start,
                        end,
                        len,
                    });
                }
            }
            ann.biased_spans = merge_spans(std::mem::take(&mut ann.biased_spans));
        }

        Ok(GoldStore {
            sentences,
            annotations,
            by_id,
        })
    }

    pub fn sentences(&self) -> &[SentenceRecord] {
        &self.sentences
    }

    pub fn annotations(&self) -> &[RaterAnnotation] {
        &self.annotations
    }

    pub fn sentence(&self, id: &str) -> Option<&SentenceRecord> {
        self.by_id.get(id).map(|&i| &self.sentences[i])
    }

    /// Annotations for one sentence, in load order.
    pub fn annotations_for(&self, sentence_id: &str) -> Vec<&RaterAnnotation> {
        self.annotations
            .iter()
            .filter(|a| a.sentence_id == sentence_id)
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// Merges overlapping spans into their union; keeps adjacent spans separate.
fn merge_spans(mut spans: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    spans.sort_unstable();
    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
    for (start, end) in spans {
        match merged.last_mut() {
            Some((_, prev_end)) if start < *prev_end => {
                *prev_end = (*prev_end).max(end);
            }
            _ => merged.push((start, end)),
        }
    }
    merged
}
