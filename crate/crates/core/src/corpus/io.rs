//! Loaders and writers for the gold, headline, and leaning files.
//!
//! Gold data travels as JSONL (one tagged object per line) or as a CSV
//! with the same columns. Headlines are JSONL; leanings are a two-column
//! CSV. All loaders report the offending line on parse failure.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::text::tokenize;
use super::{GoldStore, HeadlineRecord, OutletLeaning, RaterAnnotation, SentenceRecord};
use crate::error::{Error, Result};

/// On-disk layout of the gold file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldFormat {
    Jsonl,
    Csv,
}

/// How `biased_spans` are encoded in the export being loaded.
///
/// Some exports ship `(char_start, char_end)` offsets, others ship
/// `(token_start, token_end)` index ranges. Token ranges are converted to
/// character offsets against this crate's tokenizer at load time, so the
/// in-memory representation is always character offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpanEncoding {
    #[default]
    CharOffsets,
    TokenIndices,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum GoldLine {
    Sentence(SentenceRecord),
    Annotation(RaterAnnotation),
}

/// Loads a gold store, treating spans as character offsets.
pub fn load_gold(path: &Path, format: GoldFormat) -> Result<GoldStore> {
    load_gold_with(path, format, SpanEncoding::CharOffsets)
}

/// Loads a gold store with an explicit span encoding.
pub fn load_gold_with(
    path: &Path,
    format: GoldFormat,
    encoding: SpanEncoding,
) -> Result<GoldStore> {
    let (sentences, mut annotations) = match format {
        GoldFormat::Jsonl => parse_gold_jsonl(path)?,
        GoldFormat::Csv => parse_gold_csv(path)?,
    };
    if encoding == SpanEncoding::TokenIndices {
        convert_token_spans(&sentences, &mut annotations)?;
    }
    GoldStore::new(sentences, annotations)
}

fn parse_gold_jsonl(path: &Path) -> Result<(Vec<SentenceRecord>, Vec<RaterAnnotation>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut sentences = Vec::new();
    let mut annotations = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: GoldLine = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        match parsed {
            GoldLine::Sentence(s) => sentences.push(s),
            GoldLine::Annotation(a) => annotations.push(a),
        }
    }
    Ok((sentences, annotations))
}

const CSV_HEADER: [&str; 11] = [
    "kind",
    "id",
    "text",
    "outlet",
    "topic",
    "source_set",
    "rater_id",
    "sentence_id",
    "sentence_label",
    "opinion_label",
    "biased_spans",
];

fn parse_gold_csv(path: &Path) -> Result<(Vec<SentenceRecord>, Vec<RaterAnnotation>)> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 1,
        message: e.to_string(),
    })?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    };

    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let mut cols = HashMap::new();
    for name in CSV_HEADER {
        let idx = col(name).ok_or_else(|| parse_err(1, format!("missing column `{name}`")))?;
        cols.insert(name, idx);
    }
    let field = |rec: &csv::StringRecord, name: &str| -> String {
        rec.get(cols[name]).unwrap_or("").to_string()
    };

    let mut sentences = Vec::new();
    let mut annotations = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| parse_err(0, e.to_string()))?;
        let lineno = record.position().map_or(0, |p| p.line() as usize);
        match field(&record, "kind").as_str() {
            "sentence" => sentences.push(SentenceRecord {
                id: field(&record, "id"),
                text: field(&record, "text"),
                outlet: field(&record, "outlet"),
                topic: field(&record, "topic"),
                source_set: serde_json::from_value(serde_json::Value::String(field(
                    &record,
                    "source_set",
                )))
                .map_err(|e| parse_err(lineno, format!("source_set: {e}")))?,
            }),
            "annotation" => annotations.push(RaterAnnotation {
                rater_id: field(&record, "rater_id"),
                sentence_id: field(&record, "sentence_id"),
                sentence_label: serde_json::from_value(serde_json::Value::String(field(
                    &record,
                    "sentence_label",
                )))
                .map_err(|e| parse_err(lineno, format!("sentence_label: {e}")))?,
                opinion_label: serde_json::from_value(serde_json::Value::String(field(
                    &record,
                    "opinion_label",
                )))
                .map_err(|e| parse_err(lineno, format!("opinion_label: {e}")))?,
                biased_spans: parse_span_field(&field(&record, "biased_spans"))
                    .map_err(|m| parse_err(lineno, m))?,
            }),
            other => {
                return Err(parse_err(
                    lineno,
                    format!("unknown kind `{other}` (expected sentence or annotation)"),
                ))
            }
        }
    }
    Ok((sentences, annotations))
}

/// Spans in CSV are `start-end` pairs joined by `;`, e.g. `0-5;10-14`.
fn parse_span_field(raw: &str) -> std::result::Result<Vec<(usize, usize)>, String> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(';')
        .map(|piece| {
            let (s, e) = piece
                .split_once('-')
                .ok_or_else(|| format!("bad span `{piece}` (expected start-end)"))?;
            let start = s
                .trim()
                .parse()
                .map_err(|_| format!("bad span start `{s}`"))?;
            let end = e
                .trim()
                .parse()
                .map_err(|_| format!("bad span end `{e}`"))?;
            Ok((start, end))
        })
        .collect()
}

/// Rewrites token-index spans as character offsets using the shared tokenizer.
fn convert_token_spans(
    sentences: &[SentenceRecord],
    annotations: &mut [RaterAnnotation],
) -> Result<()> {
    let token_map: HashMap<&str, Vec<super::Token>> = sentences
        .iter()
        .map(|s| (s.id.as_str(), tokenize(&s.text)))
        .collect();
    for ann in annotations {
        let Some(tokens) = token_map.get(ann.sentence_id.as_str()) else {
            return Err(Error::DanglingSentence {
                rater_id: ann.rater_id.clone(),
                sentence_id: ann.sentence_id.clone(),
            });
        };
        let mut converted = Vec::with_capacity(ann.biased_spans.len());
        for &(tok_start, tok_end) in &ann.biased_spans {
            if tok_start >= tok_end || tok_end > tokens.len() {
                return Err(Error::SpanOutOfBounds {
                    rater_id: ann.rater_id.clone(),
                    sentence_id: ann.sentence_id.clone(),
                    start: tok_start,
                    end: tok_end,
                    len: tokens.len(),
                });
            }
            converted.push((tokens[tok_start].char_start, tokens[tok_end - 1].char_end));
        }
        ann.biased_spans = converted;
    }
    Ok(())
}

/// Writes a store as gold JSONL: sentences first, then annotations.
pub fn write_gold<W: Write>(writer: &mut W, store: &GoldStore) -> Result<()> {
    let io_err = |e: std::io::Error| Error::Io {
        path: "<writer>".to_string(),
        source: e,
    };
    for s in store.sentences() {
        let line = serde_json::to_string(&GoldLine::Sentence(s.clone()))?;
        writeln!(writer, "{line}").map_err(io_err)?;
    }
    for a in store.annotations() {
        let line = serde_json::to_string(&GoldLine::Annotation(a.clone()))?;
        writeln!(writer, "{line}").map_err(io_err)?;
    }
    Ok(())
}

/// Writes a store as gold JSONL to a file.
pub fn save_gold(path: &Path, store: &GoldStore) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_gold(&mut writer, store)?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Loads the headline corpus: JSONL objects with `id`, `text`, `outlet`.
pub fn load_headlines(path: &Path) -> Result<Vec<HeadlineRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut headlines = Vec::new();
    let mut seen = HashMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: HeadlineRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        if rec.text.trim().is_empty() {
            return Err(Error::EmptyText { id: rec.id });
        }
        if seen.insert(rec.id.clone(), ()).is_some() {
            return Err(Error::DuplicateId {
                id: rec.id,
                kind: "headline",
            });
        }
        headlines.push(rec);
    }
    Ok(headlines)
}

/// Loads outlet leanings from a CSV with header `outlet,leaning`.
/// Leaning values are matched case-insensitively.
pub fn load_leanings(path: &Path) -> Result<Vec<OutletLeaning>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 1,
        message: e.to_string(),
    })?;
    let mut leanings = Vec::new();
    let mut seen = HashMap::new();
    for result in reader.records() {
        let record = result.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        let lineno = record.position().map_or(0, |p| p.line() as usize);
        let outlet = record.get(0).unwrap_or("").trim().to_string();
        let leaning = match record.get(1).unwrap_or("").trim().to_lowercase().as_str() {
            "left" => super::Leaning::Left,
            "center" => super::Leaning::Center,
            "right" => super::Leaning::Right,
            other => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: lineno,
                    message: format!("unknown leaning `{other}` (expected left/center/right)"),
                })
            }
        };
        if seen.insert(outlet.clone(), ()).is_some() {
            return Err(Error::DuplicateId {
                id: outlet,
                kind: "outlet leaning",
            });
        }
        leanings.push(OutletLeaning { outlet, leaning });
    }
    Ok(leanings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Leaning, SourceSet};

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    const TWO_SENTENCE_JSONL: &str = concat!(
        r#"{"kind":"sentence","id":"s1","text":"The wall was built.","outlet":"a","topic":"t","source_set":"SG1"}"#,
        "\n",
        r#"{"kind":"sentence","id":"s2","text":"A radical scheme failed.","outlet":"b","topic":"t","source_set":"SG1"}"#,
        "\n",
        r#"{"kind":"annotation","rater_id":"r1","sentence_id":"s1","sentence_label":"NonBiased","opinion_label":"Factual","biased_spans":[]}"#,
        "\n",
        r#"{"kind":"annotation","rater_id":"r1","sentence_id":"s2","sentence_label":"Biased","opinion_label":"Opinionated","biased_spans":[[2,9]]}"#,
        "\n",
    );

    #[test]
    fn loads_wellformed_jsonl() {
        let f = write_temp(TWO_SENTENCE_JSONL);
        let store = load_gold(f.path(), GoldFormat::Jsonl).unwrap();
        assert_eq!(store.sentences().len(), 2);
        assert_eq!(store.annotations().len(), 2);
        assert_eq!(store.sentences()[0].source_set, SourceSet::Sg1);
    }

    #[test]
    fn parse_error_reports_line_number() {
        let f = write_temp("{\"kind\":\"sentence\"}\n");
        match load_gold(f.path(), GoldFormat::Jsonl) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn jsonl_round_trip_is_identity() {
        let f = write_temp(TWO_SENTENCE_JSONL);
        let store = load_gold(f.path(), GoldFormat::Jsonl).unwrap();
        let mut buf = Vec::new();
        write_gold(&mut buf, &store).unwrap();
        let f2 = write_temp(std::str::from_utf8(&buf).unwrap());
        let reloaded = load_gold(f2.path(), GoldFormat::Jsonl).unwrap();
        assert_eq!(store.sentences(), reloaded.sentences());
        assert_eq!(store.annotations(), reloaded.annotations());
    }

    #[test]
    fn loads_csv_with_span_field() {
        let csv = "\
kind,id,text,outlet,topic,source_set,rater_id,sentence_id,sentence_label,opinion_label,biased_spans
sentence,s1,A radical scheme failed.,a,t,SG1,,,,,
annotation,,,,,,r1,s1,Biased,Opinionated,2-9;10-16
";
        let f = write_temp(csv);
        let store = load_gold(f.path(), GoldFormat::Csv).unwrap();
        assert_eq!(store.sentences().len(), 1);
        assert_eq!(store.annotations()[0].biased_spans, vec![(2, 9), (10, 16)]);
    }

    #[test]
    fn token_index_spans_convert_to_char_offsets() {
        let jsonl = concat!(
            r#"{"kind":"sentence","id":"s1","text":"The radical scheme failed.","outlet":"a","topic":"t","source_set":"OTHER"}"#,
            "\n",
            // tokens: the[0,3) radical[4,11) scheme[12,18) failed[19,25)
            r#"{"kind":"annotation","rater_id":"r1","sentence_id":"s1","sentence_label":"Biased","opinion_label":"Mixed","biased_spans":[[1,3]]}"#,
            "\n",
        );
        let f = write_temp(jsonl);
        let store =
            load_gold_with(f.path(), GoldFormat::Jsonl, SpanEncoding::TokenIndices).unwrap();
        assert_eq!(store.annotations()[0].biased_spans, vec![(4, 18)]);
    }

    #[test]
    fn loads_headlines_and_rejects_duplicates() {
        let f = write_temp(concat!(
            r#"{"id":"h1","text":"Something happened","outlet":"a"}"#,
            "\n",
            r#"{"id":"h1","text":"Twice","outlet":"b"}"#,
            "\n"
        ));
        assert!(matches!(
            load_headlines(f.path()),
            Err(Error::DuplicateId { .. })
        ));
    }

    #[test]
    fn loads_leanings_csv() {
        let f = write_temp("outlet,leaning\nalpha,Left\nbeta,center\ngamma,RIGHT\n");
        let leanings = load_leanings(f.path()).unwrap();
        assert_eq!(leanings.len(), 3);
        assert_eq!(leanings[0].leaning, Leaning::Left);
        assert_eq!(leanings[1].leaning, Leaning::Center);
        assert_eq!(leanings[2].leaning, Leaning::Right);
    }
}
