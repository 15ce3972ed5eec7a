//! Core library for a desk-scale media-bias annotation pipeline.
//!
//! The crate covers the full path from raw multi-rater annotations to an
//! evaluated sentence classifier:
//!
//! - [`corpus`]: data model and ingestion for sentences, per-rater
//!   annotations, headlines, and outlet leanings, plus the shared text
//!   normalization and tokenization rules.
//! - [`aggregation`]: majority-vote gold labels, threshold-based biased-word
//!   sets, and class-distribution reports.
//! - [`agreement`]: Krippendorff's alpha for nominal data with missing
//!   values (plus a brute-force pairwise cross-check) and Fleiss' kappa.
//! - [`baseline`]: lexicon-driven word tagger with the one-hit sentence rule.
//! - [`distant`]: weakly labeled corpus construction from outlet leanings.
//! - [`model`]: a from-scratch embedding classifier with hand-derived
//!   gradients, Adam, and the two-stage pretrain/finetune protocol.
//! - [`eval`]: stratified k-fold cross-validation and F1 reporting.
//! - [`synthetic`]: seeded generators for the synthetic marker corpora used
//!   by the verification suites and benchmarks.
//!
//! Everything is deterministic under a fixed seed: loads are order-stable,
//! training consumes a seeded RNG, and reports serialize with stable key
//! order.

pub mod aggregation;
pub mod agreement;
pub mod baseline;
pub mod corpus;
pub mod distant;
pub mod error;
pub mod eval;
pub mod model;
pub mod synthetic;

pub use aggregation::{BiasLabel, BiasedWord, DistributionReport, GoldLabel, OpinionAgg};
pub use corpus::{
    GoldFormat, GoldStore, HeadlineRecord, Leaning, OpinionLabel, OutletLeaning, RaterAnnotation,
    SentenceLabel, SentenceRecord, SourceSet, SpanEncoding, Token,
};
pub use distant::{WeakLabel, WeakRecord};
pub use error::{Error, Result};
pub use eval::{CvReport, F1Scores, FoldAssignment};
pub use model::{Encoder, ModelParams, TrainConfig, Vocabulary};
