//! Seeded generators for synthetic marker corpora.
//!
//! The corpora exercise the two-stage training protocol end to end with a
//! known signal: biased sentences carry one of a small set of marker tokens
//! at a fixed rate, and filler words are drawn from class-tilted
//! vocabularies so the 10% of biased sentences without a marker are still
//! learnable. Weak labels are flipped at a configurable noise rate; gold
//! labels are clean.

use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Knobs for [`generate`]. Defaults match the verification suite: 5,000
/// weak and 500 gold sentences, 10 markers at rate 0.9, 20% weak-label
/// noise, and a 60/40 neutral/biased class balance.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_weak: usize,
    pub n_gold: usize,
    pub n_markers: usize,
    /// Probability that a biased sentence contains a marker token.
    pub marker_rate: f64,
    /// Probability that a weak sentence's label is flipped.
    pub weak_label_noise: f64,
    /// Share of sentences whose true class is neutral.
    pub neutral_share: f64,
    /// Filler words per class-specific vocabulary half.
    pub fillers_per_class: usize,
    /// Probability that a filler is drawn from the sentence class's own
    /// half rather than the other one.
    pub filler_tilt: f64,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_weak: 5000,
            n_gold: 500,
            n_markers: 10,
            marker_rate: 0.9,
            weak_label_noise: 0.2,
            neutral_share: 0.6,
            fillers_per_class: 60,
            filler_tilt: 0.85,
            min_tokens: 8,
            max_tokens: 14,
            seed: 7,
        }
    }
}

impl SyntheticConfig {
    fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_markers == 0 || self.fillers_per_class == 0 {
            return fail("marker and filler vocabularies must be non-empty");
        }
        for (name, p) in [
            ("marker_rate", self.marker_rate),
            ("weak_label_noise", self.weak_label_noise),
            ("neutral_share", self.neutral_share),
            ("filler_tilt", self.filler_tilt),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if self.min_tokens == 0 || self.min_tokens > self.max_tokens {
            return fail("token length bounds must satisfy 1 <= min <= max");
        }
        Ok(())
    }
}

/// One generated sentence. `biased` is the label a trainer would see: the
/// (possibly noise-flipped) weak label for weak sentences, the true class
/// for gold ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticSentence {
    pub id: String,
    pub text: String,
    pub biased: bool,
}

/// The generated corpus pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    pub weak: Vec<SyntheticSentence>,
    pub gold: Vec<SyntheticSentence>,
}

/// Generates a weak/gold corpus pair from the config's seed. The same
/// config always yields the identical corpus.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let markers: Vec<String> = (0..cfg.n_markers).map(|i| format!("marker{i}")).collect();
    let loud: Vec<String> = (0..cfg.fillers_per_class)
        .map(|i| format!("loud{i}"))
        .collect();
    let calm: Vec<String> = (0..cfg.fillers_per_class)
        .map(|i| format!("calm{i}"))
        .collect();

    let sentence = |rng: &mut ChaCha8Rng, truly_biased: bool| -> String {
        let len = rng.random_range(cfg.min_tokens..=cfg.max_tokens);
        let (own, other) = if truly_biased {
            (&loud, &calm)
        } else {
            (&calm, &loud)
        };
        let mut tokens: Vec<&str> = (0..len)
            .map(|_| {
                let half = if rng.random_bool(cfg.filler_tilt) {
                    own
                } else {
                    other
                };
                half.choose(rng).expect("non-empty filler half").as_str()
            })
            .collect();
        if truly_biased && rng.random_bool(cfg.marker_rate) {
            let marker = markers.choose(rng).expect("non-empty markers").as_str();
            let at = rng.random_range(0..=tokens.len());
            tokens.insert(at, marker);
        }
        tokens.join(" ")
    };

    let weak = (0..cfg.n_weak)
        .map(|i| {
            let truly_biased = !rng.random_bool(cfg.neutral_share);
            let text = sentence(&mut rng, truly_biased);
            let flipped = rng.random_bool(cfg.weak_label_noise);
            SyntheticSentence {
                id: format!("w{i:05}"),
                text,
                biased: truly_biased != flipped,
            }
        })
        .collect();
    let gold = (0..cfg.n_gold)
        .map(|i| {
            let truly_biased = !rng.random_bool(cfg.neutral_share);
            SyntheticSentence {
                id: format!("g{i:05}"),
                text: sentence(&mut rng, truly_biased),
                biased: truly_biased,
            }
        })
        .collect();
    Ok(SyntheticCorpus { weak, gold })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let cfg = SyntheticConfig {
            n_weak: 200,
            n_gold: 50,
            ..SyntheticConfig::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a, b);
        let c = generate(&SyntheticConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn markers_appear_only_in_truly_biased_sentences() {
        let cfg = SyntheticConfig {
            n_weak: 0,
            n_gold: 400,
            ..SyntheticConfig::default()
        };
        let corpus = generate(&cfg).unwrap();
        let has_marker = |s: &SyntheticSentence| s.text.contains("marker");
        let biased: Vec<_> = corpus.gold.iter().filter(|s| s.biased).collect();
        let neutral: Vec<_> = corpus.gold.iter().filter(|s| !s.biased).collect();
        assert!(neutral.iter().all(|s| !has_marker(s)));
        let marked = biased.iter().filter(|s| has_marker(s)).count();
        let rate = marked as f64 / biased.len() as f64;
        assert!(
            (rate - 0.9).abs() < 0.07,
            "marker rate {rate} too far from 0.9 over {} biased sentences",
            biased.len()
        );
    }

    #[test]
    fn lengths_and_class_balance_hold() {
        let cfg = SyntheticConfig::default();
        let corpus = generate(&cfg).unwrap();
        assert_eq!(corpus.weak.len(), 5000);
        assert_eq!(corpus.gold.len(), 500);
        for s in corpus.gold.iter().chain(&corpus.weak) {
            let tokens = s.text.split_whitespace().count();
            assert!((cfg.min_tokens..=cfg.max_tokens + 1).contains(&tokens));
        }
        let biased_share =
            corpus.gold.iter().filter(|s| s.biased).count() as f64 / corpus.gold.len() as f64;
        assert!(
            (biased_share - 0.4).abs() < 0.08,
            "gold biased share {biased_share}"
        );
    }

    #[test]
    fn invalid_rates_are_rejected() {
        let cfg = SyntheticConfig {
            marker_rate: 1.2,
            ..SyntheticConfig::default()
        };
        assert!(generate(&cfg).is_err());
        let cfg = SyntheticConfig {
            min_tokens: 9,
            max_tokens: 5,
            ..SyntheticConfig::default()
        };
        assert!(generate(&cfg).is_err());
    }
}
