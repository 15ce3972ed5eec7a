//! Subcommand implementations and the context they share.

pub mod data;
pub mod model;
pub mod pipeline;

use std::path::{Path, PathBuf};

use serde::Serialize;

use biaslab_core::aggregation::{aggregate_store, BiasLabel};
use biaslab_core::corpus::load_gold_with;
use biaslab_core::eval::CvItem;
use biaslab_core::{Error as CoreError, GoldFormat, GoldStore, SpanEncoding, WeakRecord};

use crate::config::{FormatArg, PipelineConfig, SpanArg};
use crate::error::CliError;
use crate::output;

/// Resolved global flags plus the loaded pipeline config.
pub struct Ctx {
    pub config: PipelineConfig,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub pretty: bool,
    pub quiet: bool,
}

impl Ctx {
    /// Diagnostic on stderr; silenced by `--quiet`.
    pub fn warn(&self, message: impl std::fmt::Display) {
        if !self.quiet {
            eprintln!("warning: {message}");
        }
    }

    /// The command's summary JSON: `--out` file if given, else stdout.
    pub fn emit<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        output::emit(value, self.out.as_deref(), self.pretty)?;
        Ok(())
    }

    /// Summary JSON forced to stdout, for commands whose `--out` names a
    /// records file instead.
    pub fn emit_stdout<T: Serialize>(&self, value: &T) -> Result<(), CliError> {
        output::emit(value, None, self.pretty)?;
        Ok(())
    }

    /// The artifact path for commands that write records: `--out` is
    /// mandatory for them.
    pub fn artifact_out(&self, what: &str) -> Result<&Path, CliError> {
        self.out
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("--out is required: it names the {what} file")))
    }

    /// Seed precedence: `--seed` flag, then config-file `seed`, then the
    /// caller's fallback.
    pub fn effective_seed(&self, fallback: u64) -> u64 {
        self.seed.or(self.config.seed).unwrap_or(fallback)
    }

    /// A required path: flag first, then the config key, else a usage error
    /// naming both.
    pub fn require_path(
        &self,
        flag: Option<PathBuf>,
        config_value: Option<&PathBuf>,
        name: &str,
    ) -> Result<PathBuf, CliError> {
        flag.or_else(|| config_value.cloned()).ok_or_else(|| {
            CliError::Usage(format!(
                "no {name} file: pass --{name} or set `{name}` in the config file"
            ))
        })
    }

    /// An optional path that a flag may supply or override.
    pub fn optional_path(
        &self,
        flag: Option<PathBuf>,
        config_value: Option<&PathBuf>,
    ) -> Option<PathBuf> {
        flag.or_else(|| config_value.cloned())
    }

    /// Loads the gold store, resolving format (flag, config key, then file
    /// extension) and span encoding (flag, config key, then char offsets).
    pub fn load_gold(
        &self,
        gold: Option<PathBuf>,
        format: Option<FormatArg>,
        spans: Option<SpanArg>,
    ) -> Result<(GoldStore, PathBuf), CliError> {
        let path = self.require_path(gold, self.config.gold.as_ref(), "gold")?;
        let format: GoldFormat = match format.or(self.config.format) {
            Some(arg) => arg.into(),
            None => sniff_format(&path),
        };
        let encoding: SpanEncoding = spans
            .or(self.config.spans)
            .map_or(SpanEncoding::CharOffsets, Into::into);
        let store = load_gold_with(&path, format, encoding)?;
        Ok((store, path))
    }
}

fn sniff_format(path: &Path) -> GoldFormat {
    match path.extension() {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => GoldFormat::Csv,
        _ => GoldFormat::Jsonl,
    }
}

/// Majority-vote bias labels turned into binary classification items, with
/// the no-majority sentences counted separately (they are excluded from
/// training and scoring, and reported).
pub fn gold_bias_items(store: &GoldStore) -> Result<(Vec<CvItem<String>>, usize), CoreError> {
    let labels = aggregate_store(store, None)?;
    let mut items = Vec::new();
    let mut excluded = 0usize;
    for label in labels {
        match label.bias {
            BiasLabel::NoAgreement => excluded += 1,
            bias => {
                let sentence = store
                    .sentence(&label.sentence_id)
                    .expect("aggregated label refers to a stored sentence");
                items.push(CvItem {
                    id: label.sentence_id,
                    payload: sentence.text.clone(),
                    biased: bias == BiasLabel::Biased,
                });
            }
        }
    }
    Ok((items, excluded))
}

/// Weak records as (text, biased) training pairs.
pub fn weak_training_pairs(records: &[WeakRecord]) -> Vec<(&str, bool)> {
    records
        .iter()
        .map(|r| {
            (
                r.text.as_str(),
                r.weak_label == biaslab_core::WeakLabel::Biased,
            )
        })
        .collect()
}
