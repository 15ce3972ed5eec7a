//! Pipeline configuration file: a TOML document supplying default paths and
//! settings that command-line flags override.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use biaslab_core::model::TrainConfig;
use biaslab_core::{Error as CoreError, GoldFormat, SpanEncoding};

/// How gold files are parsed. Mirrors [`GoldFormat`] with both config-file
/// and `--format` flag spellings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for GoldFormat {
    fn from(value: FormatArg) -> Self {
        match value {
            FormatArg::Jsonl => GoldFormat::Jsonl,
            FormatArg::Csv => GoldFormat::Csv,
        }
    }
}

/// How `biased_spans` ranges are interpreted on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpanArg {
    /// Half-open character offsets into the sentence (the native form).
    Chars,
    /// Half-open token indices, converted to character offsets on load.
    Tokens,
}

impl From<SpanArg> for SpanEncoding {
    fn from(value: SpanArg) -> Self {
        match value {
            SpanArg::Chars => SpanEncoding::CharOffsets,
            SpanArg::Tokens => SpanEncoding::TokenIndices,
        }
    }
}

/// Defaults shared by every subcommand. All fields are optional; a command
/// that needs a missing value reports which flag or key would supply it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Gold sentences + annotations (JSONL or CSV).
    pub gold: Option<PathBuf>,
    pub format: Option<FormatArg>,
    pub spans: Option<SpanArg>,
    /// Headlines for distant supervision (JSONL).
    pub headlines: Option<PathBuf>,
    /// Outlet leanings (CSV `outlet,leaning`).
    pub leanings: Option<PathBuf>,
    /// Directory of `*.txt` lexicon word lists.
    pub lexicons: Option<PathBuf>,
    /// Pre-built weak corpus (WeakRecord JSONL).
    pub weak: Option<PathBuf>,
    /// Distinct-rater threshold for biased-word aggregation; per-source
    /// defaults apply when absent.
    pub word_threshold: Option<usize>,
    /// Cross-validation fold count.
    pub k: Option<usize>,
    /// Seed for everything random; the `--seed` flag overrides it.
    pub seed: Option<u64>,
    /// Directory where the `report` command writes derived artifacts.
    pub out_dir: Option<PathBuf>,
    /// Training hyperparameters (`[train]` table).
    pub train: Option<TrainConfig>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, CoreError> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        let config: PipelineConfig = toml::from_str(&text).map_err(|e| CoreError::Parse {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    /// Referenced input paths must exist and numeric settings must be
    /// usable, so mistakes surface before any stage runs.
    pub fn validate(&self) -> Result<(), CoreError> {
        let paths = [
            ("gold", &self.gold),
            ("headlines", &self.headlines),
            ("leanings", &self.leanings),
            ("lexicons", &self.lexicons),
            ("weak", &self.weak),
        ];
        for (key, path) in paths {
            if let Some(path) = path {
                if !path.exists() {
                    return Err(CoreError::InvalidConfig(format!(
                        "{key} = {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        if self.word_threshold == Some(0) {
            return Err(CoreError::InvalidConfig(
                "word_threshold must be at least 1".to_string(),
            ));
        }
        if let Some(k) = self.k {
            if k < 2 {
                return Err(CoreError::InvalidConfig(format!(
                    "k must be at least 2, got {k}"
                )));
            }
        }
        if let Some(train) = &self.train {
            train.validate()?;
        }
        Ok(())
    }
}

/// Loads a [`TrainConfig`] from a standalone TOML or JSON file, chosen by
/// extension (anything other than `.json` is read as TOML).
pub fn load_train_config(path: &Path) -> Result<TrainConfig, CoreError> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    let is_json = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    let config: TrainConfig = if is_json {
        serde_json::from_str(&text)?
    } else {
        toml::from_str(&text).map_err(|e| CoreError::Parse {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?
    };
    config.validate()?;
    Ok(config)
}

impl fmt::Display for FormatArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormatArg::Jsonl => "jsonl",
            FormatArg::Csv => "csv",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn full_config_parses() {
        let dir = tempfile::tempdir().unwrap();
        let gold = dir.path().join("gold.jsonl");
        std::fs::File::create(&gold).unwrap();
        let text = format!(
            "gold = {:?}\nformat = \"jsonl\"\nspans = \"chars\"\nword_threshold = 2\nk = 5\nseed = 7\n\n[train]\nbatch_size = 16\nencoder = \"SelfAttention\"\n",
            gold.display().to_string()
        );
        let path = dir.path().join("pipeline.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(text.as_bytes()).unwrap();

        let config = PipelineConfig::load(&path).unwrap();
        assert_eq!(config.gold.as_deref(), Some(gold.as_path()));
        assert_eq!(config.k, Some(5));
        let train = config.train.unwrap();
        assert_eq!(train.batch_size, 16);
        assert_eq!(train.learning_rate, 5e-5); // untouched default
    }

    #[test]
    fn missing_paths_and_bad_values_are_rejected() {
        let missing = PipelineConfig {
            gold: Some(PathBuf::from("/definitely/not/here.jsonl")),
            ..PipelineConfig::default()
        };
        assert!(missing.validate().is_err());

        let bad_k = PipelineConfig {
            k: Some(1),
            ..PipelineConfig::default()
        };
        assert!(bad_k.validate().is_err());

        let bad_threshold = PipelineConfig {
            word_threshold: Some(0),
            ..PipelineConfig::default()
        };
        assert!(bad_threshold.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<PipelineConfig>("golf = \"typo.jsonl\"").is_err());
    }
}
