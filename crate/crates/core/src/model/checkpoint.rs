//! Versioned model checkpoints: config, vocabulary, and parameters in one
//! JSON container.
//!
//! JSON keeps checkpoints diffable and venue-independent; the serializer
//! emits shortest-round-trip decimal for every f64, so finite parameters
//! survive save/load bit-exactly. Non-finite parameters are rejected on
//! both ends rather than smuggled through as nulls.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::ModelParams;
use super::vocab::Vocabulary;
use super::TrainConfig;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to resume or serve a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config: TrainConfig,
    pub vocabulary: Vocabulary,
    pub params: ModelParams,
}

impl Checkpoint {
    /// Bundles a trained model, validating shape consistency up front.
    pub fn new(config: TrainConfig, vocabulary: Vocabulary, params: ModelParams) -> Result<Self> {
        let ckpt = Checkpoint {
            format_version: FORMAT_VERSION,
            config,
            vocabulary,
            params,
        };
        ckpt.validate()?;
        Ok(ckpt)
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Checkpoint(msg));
        if self.format_version != FORMAT_VERSION {
            return fail(format!(
                "unsupported checkpoint format {} (this build reads {FORMAT_VERSION})",
                self.format_version
            ));
        }
        let d = self.params.embed_dim;
        if d == 0 {
            return fail("embed_dim must be positive".to_string());
        }
        if self.params.embeddings.len() != self.vocabulary.len() * d {
            return fail(format!(
                "embedding table holds {} values, expected {} ({} surfaces x dim {d})",
                self.params.embeddings.len(),
                self.vocabulary.len() * d,
                self.vocabulary.len(),
            ));
        }
        if self.params.query.len() != d || self.params.head_w.len() != 2 * d {
            return fail("query/head shapes do not match embed_dim".to_string());
        }
        if !self.params.all_finite() {
            return fail("checkpoint contains non-finite parameters".to_string());
        }
        Ok(())
    }
}

/// Writes a checkpoint as compact JSON.
pub fn save(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    checkpoint.validate()?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer(&mut writer, checkpoint)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads and validates a checkpoint.
pub fn load(path: &Path) -> Result<Checkpoint> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let checkpoint: Checkpoint = serde_json::from_reader(BufReader::new(file))?;
    checkpoint.validate()?;
    Ok(checkpoint)
}
