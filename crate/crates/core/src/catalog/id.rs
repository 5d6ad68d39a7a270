//! Pattern identifiers and their grammar.
//!
//! An ID is `('E'|'R') ('T'|'N') int ('.' int)* [domain]`. Embedding IDs
//! never carry a domain letter; representation IDs always do. Numbers are
//! positive with no leading zeros, and the hierarchy nests at most four
//! levels deep, so `parse` and `canonical` are exact inverses on every
//! accepted string.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CatalogError;

/// Maximum hierarchy depth (`ETn.x.y.z`).
pub const MAX_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternKind {
    Embedding,
    Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Temporality {
    Temporal,
    NonTemporal,
}

/// Steganography domain suffix of representation patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StegoDomain {
    Network,
    DigitalMedia,
    Text,
    CyberPhysical,
    Filesystem,
}

impl StegoDomain {
    pub fn letter(self) -> char {
        match self {
            Self::Network => 'n',
            Self::DigitalMedia => 'd',
            Self::Text => 't',
            Self::CyberPhysical => 'c',
            Self::Filesystem => 'f',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'n' => Some(Self::Network),
            'd' => Some(Self::DigitalMedia),
            't' => Some(Self::Text),
            'c' => Some(Self::CyberPhysical),
            'f' => Some(Self::Filesystem),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternId {
    pub kind: PatternKind,
    pub temporality: Temporality,
    /// Hierarchy path, e.g. `[4, 1]` for `EN4.1`. Nonempty, entries >= 1.
    pub path: Vec<u32>,
    /// Present exactly on representation patterns.
    pub domain: Option<StegoDomain>,
}

impl PatternId {
    pub fn embedding(temporality: Temporality, path: &[u32]) -> Self {
        Self {
            kind: PatternKind::Embedding,
            temporality,
            path: path.to_vec(),
            domain: None,
        }
    }

    pub fn representation(temporality: Temporality, path: &[u32], domain: StegoDomain) -> Self {
        Self {
            kind: PatternKind::Representation,
            temporality,
            path: path.to_vec(),
            domain: Some(domain),
        }
    }

    pub fn parse(s: &str) -> Result<Self, CatalogError> {
        let malformed = |reason: &str| CatalogError::MalformedId {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut chars = s.chars().peekable();
        let kind = match chars.next() {
            Some('E') => PatternKind::Embedding,
            Some('R') => PatternKind::Representation,
            _ => return Err(malformed("must start with 'E' or 'R'")),
        };
        let temporality = match chars.next() {
            Some('T') => Temporality::Temporal,
            Some('N') => Temporality::NonTemporal,
            _ => return Err(malformed("second letter must be 'T' or 'N'")),
        };
        let mut path = Vec::new();
        loop {
            let mut digits = String::new();
            while let Some(c) = chars.peek().filter(|c| c.is_ascii_digit()) {
                digits.push(*c);
                chars.next();
            }
            if digits.is_empty() {
                return Err(malformed("expected a number"));
            }
            if digits.len() > 1 && digits.starts_with('0') {
                return Err(malformed("leading zeros are not canonical"));
            }
            let n: u32 = digits
                .parse()
                .map_err(|_| malformed("number out of range"))?;
            if n == 0 {
                return Err(malformed("numbers must be positive"));
            }
            path.push(n);
            if path.len() > MAX_DEPTH {
                return Err(malformed("nesting deeper than four levels"));
            }
            if chars.peek() == Some(&'.') {
                chars.next();
                continue;
            }
            break;
        }
        let domain = match chars.next() {
            None => None,
            Some(c) => match StegoDomain::from_letter(c) {
                Some(d) if chars.next().is_none() => Some(d),
                Some(_) => return Err(malformed("trailing characters after domain letter")),
                None => return Err(malformed("illegal domain letter")),
            },
        };
        match (kind, domain) {
            (PatternKind::Embedding, Some(_)) => {
                Err(malformed("embedding IDs take no domain letter"))
            }
            (PatternKind::Representation, None) => {
                Err(malformed("representation IDs require a domain letter"))
            }
            _ => Ok(Self {
                kind,
                temporality,
                path,
                domain,
            }),
        }
    }

    /// Canonical string form; `parse` inverts it exactly.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        out.push(match self.kind {
            PatternKind::Embedding => 'E',
            PatternKind::Representation => 'R',
        });
        out.push(match self.temporality {
            Temporality::Temporal => 'T',
            Temporality::NonTemporal => 'N',
        });
        for (i, n) in self.path.iter().enumerate() {
            if i > 0 {
                out.push('.');
            }
            out.push_str(&n.to_string());
        }
        if let Some(d) = self.domain {
            out.push(d.letter());
        }
        out
    }

    /// Structural invariants, for records built without going through
    /// `parse`.
    pub fn check(&self) -> Result<(), String> {
        if self.path.is_empty() {
            return Err("path must be nonempty".into());
        }
        if self.path.len() > MAX_DEPTH {
            return Err("path deeper than four levels".into());
        }
        if self.path.iter().any(|&n| n == 0) {
            return Err("path entries must be positive".into());
        }
        match (self.kind, self.domain) {
            (PatternKind::Embedding, Some(_)) => Err("embedding ID with domain".into()),
            (PatternKind::Representation, None) => Err("representation ID without domain".into()),
            _ => Ok(()),
        }
    }

    pub fn is_root(&self) -> bool {
        self.path.len() == 1
    }

    /// The ID with the last path entry removed, if any.
    pub fn parent(&self) -> Option<PatternId> {
        if self.path.len() < 2 {
            return None;
        }
        Some(Self {
            kind: self.kind,
            temporality: self.temporality,
            path: self.path[..self.path.len() - 1].to_vec(),
            domain: self.domain,
        })
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl FromStr for PatternId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for PatternId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical())
    }
}

impl<'de> Deserialize<'de> for PatternId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_parses() {
        assert_eq!(
            PatternId::parse("ET2").unwrap(),
            PatternId::embedding(Temporality::Temporal, &[2])
        );
        assert_eq!(
            PatternId::parse("RT1t").unwrap(),
            PatternId::representation(Temporality::Temporal, &[1], StegoDomain::Text)
        );
        assert_eq!(
            PatternId::parse("EN4.1").unwrap(),
            PatternId::embedding(Temporality::NonTemporal, &[4, 1])
        );
    }

    #[test]
    fn documented_formats() {
        assert_eq!(
            PatternId::embedding(Temporality::Temporal, &[1, 1]).canonical(),
            "ET1.1"
        );
        assert_eq!(
            PatternId::representation(Temporality::NonTemporal, &[2, 1], StegoDomain::Network)
                .canonical(),
            "RN2.1n"
        );
        assert_eq!(
            PatternId::embedding(Temporality::NonTemporal, &[5]).canonical(),
            "EN5"
        );
    }

    #[test]
    fn rejections() {
        for bad in [
            "", "EN3x", "RT1", "XT1", "EZ1", "ET0", "ET", "ET1.", "ET1..2", "ET01", "ET1.0",
            "ET1.1.1.1.1", "RN1q", "ET1n", "RT1nn", "et1", " ET1", "ET1 ", "RT99999999999999n",
        ] {
            assert!(
                matches!(PatternId::parse(bad), Err(CatalogError::MalformedId { .. })),
                "expected rejection of {bad:?}"
            );
        }
    }

    #[test]
    fn depth_four_is_the_limit() {
        assert!(PatternId::parse("ET1.2.3.4").is_ok());
        assert!(PatternId::parse("ET1.2.3.4.5").is_err());
    }

    #[test]
    fn parent_strips_last_entry() {
        let id = PatternId::parse("RN4.1n").unwrap();
        assert_eq!(id.parent().unwrap().canonical(), "RN4n");
        assert!(PatternId::parse("EN4").unwrap().parent().is_none());
    }
}
