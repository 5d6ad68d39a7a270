//! Text documents: a character sequence with per-character style.
//!
//! The main file is plain UTF-8. Color tags travel in an optional JSON
//! sidecar (`{"colors":[[index,tag],...]}`); case significance is derived
//! from the codepoint itself, so the text file alone round-trips
//! case-modulated documents.

use serde::{Deserialize, Serialize};

use super::CoverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyledChar {
    pub ch: char,
    /// True when the character has distinct single-char upper/lower forms.
    pub case_significant: bool,
    pub color_tag: Option<u8>,
}

fn raw_case_pair(ch: char) -> Option<(char, char)> {
    let mut lo = ch.to_lowercase();
    let mut up = ch.to_uppercase();
    match (lo.next(), lo.next(), up.next(), up.next()) {
        (Some(l), None, Some(u), None) if l != u => Some((l, u)),
        _ => None,
    }
}

/// A case pair both of whose members map back to the same pair. The
/// stability requirement keeps case significance derivable from the
/// codepoint even after the character has been case-flipped (chars like
/// 'ẞ', whose lowercase form has no single-char uppercase, are excluded).
fn simple_case_pair(ch: char) -> Option<(char, char)> {
    let (l, u) = raw_case_pair(ch)?;
    (raw_case_pair(l) == Some((l, u)) && raw_case_pair(u) == Some((l, u))).then_some((l, u))
}

impl StyledChar {
    pub fn plain(ch: char) -> Self {
        Self {
            ch,
            case_significant: simple_case_pair(ch).is_some(),
            color_tag: None,
        }
    }

    /// Replace the character with its upper or lower form, keeping style.
    pub fn with_case(self, upper: bool) -> Self {
        match simple_case_pair(self.ch) {
            Some((lo, up)) => Self {
                ch: if upper { up } else { lo },
                ..self
            },
            None => self,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TextDocument {
    pub chars: Vec<StyledChar>,
}

impl TextDocument {
    pub fn from_plain(s: &str) -> Self {
        Self {
            chars: s.chars().map(StyledChar::plain).collect(),
        }
    }

    pub fn to_plain(&self) -> String {
        self.chars.iter().map(|c| c.ch).collect()
    }

    /// Words, split on whitespace; recomputable from `chars` by definition.
    pub fn tokens(&self) -> Vec<String> {
        self.to_plain()
            .split_whitespace()
            .map(str::to_string)
            .collect()
    }
}

#[derive(Serialize, Deserialize, Default)]
struct Sidecar {
    colors: Vec<(usize, u8)>,
}

/// Load a document from UTF-8 text plus an optional style sidecar.
pub fn load_text(bytes: &[u8], sidecar: Option<&[u8]>) -> Result<TextDocument, CoverError> {
    let s = std::str::from_utf8(bytes)
        .map_err(|e| CoverError::parse(0, format!("text is not UTF-8: {e}")))?;
    let mut doc = TextDocument::from_plain(s);
    if let Some(raw) = sidecar {
        let side: Sidecar = serde_json::from_slice(raw)
            .map_err(|e| CoverError::parse(0, format!("bad style sidecar: {e}")))?;
        for (idx, tag) in side.colors {
            let n = doc.chars.len();
            let c = doc.chars.get_mut(idx).ok_or_else(|| {
                CoverError::parse(0, format!("sidecar colors char {idx} of {n}"))
            })?;
            c.color_tag = Some(tag);
        }
    }
    Ok(doc)
}

/// Serialize to (text bytes, optional sidecar). The sidecar is emitted only
/// when at least one character carries a color tag.
pub fn save_text(doc: &TextDocument) -> (Vec<u8>, Option<Vec<u8>>) {
    let text = doc.to_plain().into_bytes();
    let colors: Vec<(usize, u8)> = doc
        .chars
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.color_tag.map(|t| (i, t)))
        .collect();
    let sidecar = if colors.is_empty() {
        None
    } else {
        Some(
            serde_json::to_vec(&Sidecar { colors }).expect("sidecar serializes"),
        )
    };
    (text, sidecar)
}
