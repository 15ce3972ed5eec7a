//! Token vocabulary with reserved unknown/padding indices.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::tokenize;

/// Index of the unknown-token embedding.
pub const UNK: usize = 0;
/// Index of the padding embedding, also used for empty sequences.
pub const PAD: usize = 1;

/// Surface-to-index map, dense and stable under rebuilds.
///
/// Built by counting token surfaces over a text collection and keeping
/// those seen at least `min_freq` times; the kept surfaces are sorted, so
/// the mapping depends only on the multiset of input tokens, not on text
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    surfaces: Vec<String>,
    min_freq: usize,
    index: HashMap<String, usize>,
}

/// Wire form: the surface list (specials included) plus the build cutoff.
#[derive(Serialize, Deserialize)]
struct VocabularyData {
    min_freq: usize,
    surfaces: Vec<String>,
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData {
            min_freq: v.min_freq,
            surfaces: v.surfaces,
        }
    }
}

impl TryFrom<VocabularyData> for Vocabulary {
    type Error = String;

    fn try_from(data: VocabularyData) -> Result<Self, String> {
        if data.surfaces.len() < 2
            || data.surfaces[UNK] != Vocabulary::UNK_SURFACE
            || data.surfaces[PAD] != Vocabulary::PAD_SURFACE
        {
            return Err("vocabulary must start with the unk/pad specials".to_string());
        }
        let mut index = HashMap::with_capacity(data.surfaces.len());
        for (i, s) in data.surfaces.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(format!("duplicate vocabulary surface `{s}`"));
            }
        }
        Ok(Vocabulary {
            surfaces: data.surfaces,
            min_freq: data.min_freq,
            index,
        })
    }
}

impl Vocabulary {
    const UNK_SURFACE: &'static str = "<unk>";
    const PAD_SURFACE: &'static str = "<pad>";

    /// Builds a vocabulary over the tokenized texts, keeping surfaces with
    /// frequency >= `min_freq`.
    pub fn build<'a, I>(texts: I, min_freq: usize) -> Vocabulary
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        for text in texts {
            for token in tokenize(text) {
                *counts.entry(token.surface).or_insert(0) += 1;
            }
        }
        let mut kept: Vec<String> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_freq)
            .map(|(s, _)| s)
            .collect();
        kept.sort();

        let mut surfaces = Vec::with_capacity(kept.len() + 2);
        surfaces.push(Self::UNK_SURFACE.to_string());
        surfaces.push(Self::PAD_SURFACE.to_string());
        surfaces.extend(kept);
        let index = surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Vocabulary {
            surfaces,
            min_freq,
            index,
        }
    }

    /// Number of indices, specials included.
    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        false // UNK and PAD always exist
    }

    pub fn min_freq(&self) -> usize {
        self.min_freq
    }

    pub fn index_of(&self, surface: &str) -> Option<usize> {
        self.index.get(surface).copied()
    }

    pub fn surface(&self, index: usize) -> Option<&str> {
        self.surfaces.get(index).map(String::as_str)
    }

    /// Tokenizes and maps a text to indices, using UNK for out-of-vocabulary
    /// surfaces. An empty tokenization yields the single PAD index so every
    /// sequence has at least one embedding to pool.
    pub fn encode(&self, text: &str) -> Vec<usize> {
        let ids: Vec<usize> = tokenize(text)
            .into_iter()
            .map(|t| self.index_of(&t.surface).unwrap_or(UNK))
            .collect();
        if ids.is_empty() {
            vec![PAD]
        } else {
            ids
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_freq_filters_rare_surfaces() {
        let texts = ["the vote passed", "the vote failed", "unusual word"];
        let vocab = Vocabulary::build(texts, 2);
        // kept: "the" (2), "vote" (2); everything else is rare
        assert_eq!(vocab.len(), 4);
        assert!(vocab.index_of("the").is_some());
        assert!(vocab.index_of("vote").is_some());
        assert_eq!(vocab.index_of("unusual"), None);
    }

    #[test]
    fn indices_are_sorted_and_stable_across_text_order() {
        let a = Vocabulary::build(["b b", "a a", "c c"], 2);
        let b = Vocabulary::build(["c c", "a a", "b b"], 2);
        assert_eq!(a, b);
        assert_eq!(a.surface(2), Some("a"));
        assert_eq!(a.surface(3), Some("b"));
        assert_eq!(a.surface(4), Some("c"));
    }

    #[test]
    fn encode_maps_unknowns_and_empties() {
        let vocab = Vocabulary::build(["the vote passed", "the vote failed"], 2);
        let ids = vocab.encode("The vote was rigged");
        assert_eq!(ids[0], vocab.index_of("the").unwrap());
        assert_eq!(ids[1], vocab.index_of("vote").unwrap());
        assert_eq!(ids[2], UNK);
        assert_eq!(ids[3], UNK);
        assert_eq!(vocab.encode("  …  "), vec![PAD]);
    }

    #[test]
    fn serde_round_trip_preserves_the_mapping() {
        let vocab = Vocabulary::build(["alpha beta alpha beta gamma gamma"], 2);
        let json = serde_json::to_string(&vocab).unwrap();
        let back: Vocabulary = serde_json::from_str(&json).unwrap();
        assert_eq!(vocab, back);
        assert!(
            serde_json::from_str::<Vocabulary>("{\"min_freq\":2,\"surfaces\":[\"x\"]}").is_err()
        );
    }
}
