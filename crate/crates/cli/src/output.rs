//! JSON emission helpers: one summary document per command, plus JSONL
//! record files for bulk artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use biaslab_core::Error as CoreError;

/// Serializes `value` (compact, or indented with `pretty`) followed by a
/// newline, to `out` when given, otherwise to stdout.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>, pretty: bool) -> Result<(), CoreError> {
    let mut text = if pretty {
        serde_json::to_string_pretty(value)?
    } else {
        serde_json::to_string(value)?
    };
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CoreError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes one compact JSON object per item.
pub fn write_jsonl<T, I>(path: &Path, records: I) -> Result<(), CoreError>
where
    T: Serialize,
    I: IntoIterator<Item = T>,
{
    let file = File::create(path).map_err(|e| CoreError::io(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut writer, &record)?;
        writer
            .write_all(b"\n")
            .map_err(|e| CoreError::io(path, e))?;
    }
    writer.flush().map_err(|e| CoreError::io(path, e))
}
