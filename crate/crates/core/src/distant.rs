//! Weakly labeled corpus construction from outlet leanings.
//!
//! Headlines from partisan (left/right) outlets become `Biased`, headlines
//! from center outlets become `Neutral`. Anything whose normalized text
//! collides with a gold sentence is dropped so the weak corpus and the gold
//! corpus stay disjoint; duplicates within the headline set are dropped
//! too (first occurrence wins). Near-duplicates against gold are only
//! reported, never removed — exact matching keeps the build auditable.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize, tokenize, HeadlineRecord, Leaning, OutletLeaning, SentenceRecord};
use crate::error::{Error, Result};

/// Label assigned by outlet leaning alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WeakLabel {
    Biased,
    Neutral,
}

impl From<Leaning> for WeakLabel {
    fn from(leaning: Leaning) -> Self {
        match leaning {
            Leaning::Left | Leaning::Right => WeakLabel::Biased,
            Leaning::Center => WeakLabel::Neutral,
        }
    }
}

/// One weakly labeled training sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakRecord {
    pub id: String,
    pub text: String,
    pub weak_label: WeakLabel,
    pub outlet: String,
}

/// A (headline id, gold sentence id) pair whose token sets overlap heavily.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearDuplicate {
    pub headline_id: String,
    pub gold_id: String,
    pub jaccard: f64,
}

/// Result of a corpus build: the kept records plus an audit trail.
#[derive(Debug, Clone, PartialEq)]
pub struct DistantBuild {
    pub records: Vec<WeakRecord>,
    /// Headlines dropped for exactly matching a gold sentence.
    pub dropped_overlap: usize,
    /// Headlines dropped as duplicates of an earlier headline.
    pub dropped_duplicate: usize,
    /// Kept records suspiciously close to a gold sentence (warning only).
    pub near_duplicates: Vec<NearDuplicate>,
}

const NEAR_DUPLICATE_JACCARD: f64 = 0.9;

/// Builds the weak corpus from headlines, outlet leanings, and the gold
/// sentences to stay disjoint from. Headline order is preserved, so the
/// output is deterministic; the record set depends only on the inputs.
pub fn build_corpus(
    headlines: &[HeadlineRecord],
    leanings: &[OutletLeaning],
    gold: &[SentenceRecord],
) -> Result<DistantBuild> {
    let leaning_of: HashMap<&str, Leaning> = leanings
        .iter()
        .map(|l| (l.outlet.as_str(), l.leaning))
        .collect();

    let unknown: BTreeSet<String> = headlines
        .iter()
        .filter(|h| !leaning_of.contains_key(h.outlet.as_str()))
        .map(|h| h.outlet.clone())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownOutlets {
            outlets: unknown.into_iter().collect(),
        });
    }

    let gold_texts: HashSet<String> = gold.iter().map(|s| normalize(&s.text)).collect();

    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut dropped_overlap = 0;
    let mut dropped_duplicate = 0;
    for headline in headlines {
        let text = normalize(&headline.text);
        if gold_texts.contains(&text) {
            dropped_overlap += 1;
            continue;
        }
        if !seen.insert(text) {
            dropped_duplicate += 1;
            continue;
        }
        records.push(WeakRecord {
            id: headline.id.clone(),
            text: headline.text.clone(),
            weak_label: WeakLabel::from(leaning_of[headline.outlet.as_str()]),
            outlet: headline.outlet.clone(),
        });
    }

    let near_duplicates = find_near_duplicates(&records, gold);
    Ok(DistantBuild {
        records,
        dropped_overlap,
        dropped_duplicate,
        near_duplicates,
    })
}

/// Finds kept records whose token-set Jaccard similarity to some gold
/// sentence reaches the warning threshold. An inverted token index over the
/// gold side keeps this near-linear for realistic corpus sizes.
fn find_near_duplicates(records: &[WeakRecord], gold: &[SentenceRecord]) -> Vec<NearDuplicate> {
    let token_set = |text: &str| -> BTreeSet<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    };
    let gold_sets: Vec<(usize, BTreeSet<String>)> = gold
        .iter()
        .enumerate()
        .map(|(i, s)| (i, token_set(&s.text)))
        .collect();
    let mut by_token: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, set) in &gold_sets {
        for tok in set {
            by_token.entry(tok.as_str()).or_default().push(*i);
        }
    }

    let mut warnings = Vec::new();
    for record in records {
        let set = token_set(&record.text);
        if set.is_empty() {
            continue;
        }
        let mut candidates = BTreeSet::new();
        for tok in &set {
            if let Some(ids) = by_token.get(tok.as_str()) {
                candidates.extend(ids.iter().copied());
            }
        }
        for gi in candidates {
            let other = &gold_sets[gi].1;
            let inter = set.intersection(other).count();
            let union = set.len() + other.len() - inter;
            if union == 0 {
                continue;
            }
            let jaccard = inter as f64 / union as f64;
            if jaccard >= NEAR_DUPLICATE_JACCARD {
                warnings.push(NearDuplicate {
                    headline_id: record.id.clone(),
                    gold_id: gold[gi].id.clone(),
                    jaccard,
                });
            }
        }
    }
    warnings
}

/// Per-label and per-outlet counts over a weak corpus, outlets in name
/// order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_records: usize,
    pub n_biased: usize,
    pub n_neutral: usize,
    pub per_outlet: BTreeMap<String, OutletCounts>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutletCounts {
    pub biased: usize,
    pub neutral: usize,
}

/// Loads a weak corpus from JSONL (one [`WeakRecord`] per line; blank lines
/// skipped). Duplicate ids are rejected.
pub fn load_weak(path: &std::path::Path) -> Result<Vec<WeakRecord>> {
    use std::io::BufRead;
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records: Vec<WeakRecord> = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: WeakRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::DuplicateId {
                id: record.id,
                kind: "weak record",
            });
        }
        records.push(record);
    }
    Ok(records)
}

/// Counts labels overall and per outlet.
pub fn corpus_stats(records: &[WeakRecord]) -> CorpusStats {
    let mut stats = CorpusStats {
        n_records: records.len(),
        ..CorpusStats::default()
    };
    for r in records {
        let outlet = stats.per_outlet.entry(r.outlet.clone()).or_default();
        match r.weak_label {
            WeakLabel::Biased => {
                stats.n_biased += 1;
                outlet.biased += 1;
            }
            WeakLabel::Neutral => {
                stats.n_neutral += 1;
                outlet.neutral += 1;
            }
        }
    }
    stats
}
