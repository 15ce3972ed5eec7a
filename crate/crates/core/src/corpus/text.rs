//! Text normalization and tokenization shared by every downstream stage.

use unicode_normalization::UnicodeNormalization;

use super::Token;

/// Canonical form used for deduplication and cross-corpus overlap checks:
/// Unicode NFC, lowercased, whitespace runs collapsed to one space, and
/// trimmed. Idempotent.
pub fn normalize(text: &str) -> String {
    let folded: String = text
        .nfc()
        .collect::<String>()
        .to_lowercase()
        .nfc()
        .collect();
    let mut out = String::with_capacity(folded.len());
    let mut in_space = true; // leading whitespace is dropped
    for ch in folded.chars() {
        if ch.is_whitespace() {
            if !in_space {
                out.push(' ');
                in_space = true;
            }
        } else {
            out.push(ch);
            in_space = false;
        }
    }
    while out.ends_with(' ') {
        out.pop();
    }
    out
}

/// Is this an apostrophe we keep inside a word ("trump's", "don’t")?
fn is_apostrophe(ch: char) -> bool {
    ch == '\'' || ch == '\u{2019}'
}

/// Splits text into maximal runs of Unicode alphanumerics, keeping
/// apostrophes only when they sit between two alphanumeric characters.
///
/// Offsets are character offsets into the *original* text; surfaces are the
/// normalized (NFC, lowercase) form of the original slice.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() {
            let keep_apostrophe = is_apostrophe(chars[i])
                && i > start
                && i + 1 < chars.len()
                && chars[i + 1].is_alphanumeric();
            if chars[i].is_alphanumeric() || keep_apostrophe {
                i += 1;
            } else {
                break;
            }
        }
        let surface: String = chars[start..i]
            .iter()
            .collect::<String>()
            .nfc()
            .collect::<String>()
            .to_lowercase()
            .nfc()
            .collect();
        tokens.push(Token {
            surface,
            char_start: start,
            char_end: i,
        });
    }
    tokens
}
