//! Lexicon baseline: word-level tagging by dictionary membership and the
//! one-hit sentence rule (any tagged word makes the sentence biased).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::corpus::{normalize, SentenceLabel, Token};
use crate::error::{Error, Result};

/// Named word lists (opinion words, hedges, assertive/factive verbs, or any
/// extra list), each a set of normalized surfaces.
///
/// Tagging uses the union of all lists; names exist for provenance and
/// reporting. Multi-word entries are kept but can never match a single
/// token, so they are effectively inert.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexiconSet {
    lists: BTreeMap<String, BTreeSet<String>>,
}

impl LexiconSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds (or extends) a named list, normalizing every entry.
    pub fn insert_list<I, S>(&mut self, name: &str, entries: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let list = self.lists.entry(name.to_string()).or_default();
        for entry in entries {
            let surface = normalize(entry.as_ref());
            if !surface.is_empty() {
                list.insert(surface);
            }
        }
    }

    /// Loads every `*.txt` file in a directory as one list named after the
    /// file stem. Lines are one entry each; `#` starts a comment; blank
    /// lines are skipped.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut set = Self::new();
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths: Vec<_> = entries
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(dir, e))?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
            .collect();
        paths.sort();
        for path in paths {
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("lexicon")
                .to_string();
            let contents = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let words = contents.lines().filter_map(|line| {
                let line = line.split('#').next().unwrap_or("").trim();
                (!line.is_empty()).then_some(line)
            });
            set.insert_list(&name, words);
        }
        Ok(set)
    }

    /// True when any list contains the surface.
    pub fn contains(&self, surface: &str) -> bool {
        self.lists.values().any(|list| list.contains(surface))
    }

    /// The named lists, in name order.
    pub fn lists(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.lists.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn total_entries(&self) -> usize {
        self.lists.values().map(BTreeSet::len).sum()
    }
}

/// Marks each token whose surface appears in any lexicon list.
pub fn tag_words(tokens: &[Token], lex: &LexiconSet) -> Vec<bool> {
    tokens.iter().map(|t| lex.contains(&t.surface)).collect()
}

/// One-hit rule: a sentence with at least one tagged word is `Biased`,
/// otherwise `NonBiased`.
pub fn classify_sentence(tokens: &[Token], lex: &LexiconSet) -> SentenceLabel {
    if tag_words(tokens, lex).iter().any(|&b| b) {
        SentenceLabel::Biased
    } else {
        SentenceLabel::NonBiased
    }
}
