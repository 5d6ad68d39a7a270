//! The pattern taxonomy as validated, navigable PLML-style records.
//!
//! A [`Catalog`] is a flat list of [`PatternRecord`]s whose structure (ID
//! grammar, parent chains, link targets, alias uniqueness) is checked by
//! [`Catalog::validate`]. The built-in taxonomy ships via
//! [`seed_catalog`]; [`Catalog::resolve`] looks records up by ID, name, or
//! legacy alias.

mod id;
mod io;
mod seed;

pub use id::{PatternId, PatternKind, StegoDomain, Temporality, MAX_DEPTH};
pub use io::{load_catalog, save_catalog};
pub use seed::seed_catalog;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covers::{ActionKind, ModifiableObjectKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("malformed pattern id {input:?}: {reason}")]
    MalformedId { input: String, reason: String },
    #[error("no pattern matches {0:?}")]
    NotFound(String),
    #[error("key {key:?} is ambiguous between {matches:?}")]
    AmbiguousKey { key: String, matches: Vec<String> },
    #[error("catalog parse error: {0}")]
    Parse(String),
}

/// A pattern name: glossary object + action plus the rendered compound
/// (e.g. "Event/Element Interval Modulation"). The full name puts the
/// number first: `EN4. State/Value Modulation`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternName {
    pub object: ModifiableObjectKind,
    pub action: ActionKind,
    pub text: String,
}

impl PatternName {
    pub fn new(object: ModifiableObjectKind, action: ActionKind, text: &str) -> Self {
        Self {
            object,
            action,
            text: text.to_string(),
        }
    }

    /// Number + object part + action part, space separated.
    pub fn full(&self, id: &PatternId) -> String {
        format!("{}. {}", id.canonical(), self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PatternLinks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<PatternId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<PatternId>,
    /// Empty for atomic patterns; two or more components for hybrids.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hybrid_of: Vec<PatternId>,
    /// Representation patterns only: the pattern whose side effects this
    /// one observes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_from: Option<PatternId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub id: PatternId,
    pub name: PatternName,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub examples: Vec<String>,
    #[serde(default)]
    pub links: PatternLinks,
    /// Unknown file fields, preserved opaquely across load/save.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl PatternRecord {
    pub fn is_hybrid(&self) -> bool {
        !self.links.hybrid_of.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkKind {
    Related,
    HybridOf,
    DerivedFrom,
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Related => f.write_str("related"),
            Self::HybridOf => f.write_str("hybrid_of"),
            Self::DerivedFrom => f.write_str("derived_from"),
        }
    }
}

/// A structural breach found by [`Catalog::validate`]. Violations are data,
/// not failures: an invalid catalog still loads and can be inspected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateId(String),
    DuplicateAlias(String),
    /// A non-root record whose parent is absent from the catalog.
    OrphanParent(String),
    /// An explicit parent link that is not the ID minus its last entry.
    ParentMismatch { id: String, linked: String },
    DanglingLink {
        from: String,
        to: String,
        kind: LinkKind,
    },
    /// hybrid_of must name at least two components.
    HybridArity(String),
    DerivedFromOnEmbedding(String),
    InvalidId { id: String, reason: String },
    NamingConvention { id: String, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DuplicateId(id) => write!(f, "DuplicateId({id})"),
            Self::DuplicateAlias(a) => write!(f, "DuplicateAlias({a:?})"),
            Self::OrphanParent(id) => write!(f, "OrphanParent({id})"),
            Self::ParentMismatch { id, linked } => {
                write!(f, "ParentMismatch({id} links parent {linked})")
            }
            Self::DanglingLink { from, to, kind } => {
                write!(f, "DanglingLink({from} -[{kind}]-> {to})")
            }
            Self::HybridArity(id) => write!(f, "HybridArity({id})"),
            Self::DerivedFromOnEmbedding(id) => write!(f, "DerivedFromOnEmbedding({id})"),
            Self::InvalidId { id, reason } => write!(f, "InvalidId({id}: {reason})"),
            Self::NamingConvention { id, reason } => {
                write!(f, "NamingConvention({id}: {reason})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    pub plml_version: String,
    pub records: Vec<PatternRecord>,
    /// Unknown top-level file fields, preserved opaquely.
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self {
            plml_version: "1.1".to_string(),
            records: Vec::new(),
            extra: serde_json::Map::new(),
        }
    }
}

impl Catalog {
    pub fn new(records: Vec<PatternRecord>) -> Self {
        Self {
            records,
            ..Self::default()
        }
    }

    pub fn get(&self, id: &PatternId) -> Option<&PatternRecord> {
        self.records.iter().find(|r| &r.id == id)
    }

    pub fn embedding_records(&self) -> impl Iterator<Item = &PatternRecord> {
        self.records
            .iter()
            .filter(|r| r.id.kind == PatternKind::Embedding)
    }

    /// Look a record up by canonical ID, then full or compound name, then
    /// alias — all case-insensitive.
    ///
    /// Representation mirrors intentionally reuse their embedding peer's
    /// compound name; when a name matches one embedding record plus its
    /// mirrors, the embedding record owns the name (mirrors stay reachable
    /// by ID and by legacy alias). Any other multi-match is reported as
    /// ambiguous, which a valid catalog never produces.
    pub fn resolve(&self, key: &str) -> Result<&PatternRecord, CatalogError> {
        let needle = key.trim().to_lowercase();
        if needle.is_empty() {
            return Err(CatalogError::NotFound(key.to_string()));
        }

        if let Some(r) = self
            .records
            .iter()
            .find(|r| r.id.canonical().to_lowercase() == needle)
        {
            return Ok(r);
        }

        let by_name: Vec<&PatternRecord> = self
            .records
            .iter()
            .filter(|r| {
                r.name.text.to_lowercase() == needle
                    || r.name.full(&r.id).to_lowercase() == needle
            })
            .collect();
        match by_name.len() {
            1 => return Ok(by_name[0]),
            0 => {}
            _ => {
                let embedding: Vec<&&PatternRecord> = by_name
                    .iter()
                    .filter(|r| r.id.kind == PatternKind::Embedding)
                    .collect();
                if embedding.len() == 1 {
                    return Ok(embedding[0]);
                }
                return Err(CatalogError::AmbiguousKey {
                    key: key.to_string(),
                    matches: by_name.iter().map(|r| r.id.canonical()).collect(),
                });
            }
        }

        let by_alias: Vec<&PatternRecord> = self
            .records
            .iter()
            .filter(|r| r.aliases.iter().any(|a| a.to_lowercase() == needle))
            .collect();
        match by_alias.len() {
            1 => Ok(by_alias[0]),
            0 => Err(CatalogError::NotFound(key.to_string())),
            _ => Err(CatalogError::AmbiguousKey {
                key: key.to_string(),
                matches: by_alias.iter().map(|r| r.id.canonical()).collect(),
            }),
        }
    }

    /// Every invariant breach as a structured violation; an empty result
    /// means the catalog is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let mut ids: BTreeMap<String, usize> = BTreeMap::new();
        for r in &self.records {
            *ids.entry(r.id.canonical()).or_insert(0) += 1;
        }
        for (id, count) in &ids {
            if *count > 1 {
                violations.push(Violation::DuplicateId(id.clone()));
            }
        }

        let mut aliases: BTreeMap<String, usize> = BTreeMap::new();
        for r in &self.records {
            for a in &r.aliases {
                *aliases.entry(a.to_lowercase()).or_insert(0) += 1;
            }
        }
        for (alias, count) in &aliases {
            if *count > 1 {
                violations.push(Violation::DuplicateAlias(alias.clone()));
            }
        }

        for r in &self.records {
            let id = r.id.canonical();
            if let Err(reason) = r.id.check() {
                violations.push(Violation::InvalidId { id: id.clone(), reason });
                continue;
            }
            if !r.id.is_root() {
                let parent = r.id.parent().expect("non-root has a parent id");
                if !ids.contains_key(&parent.canonical()) {
                    violations.push(Violation::OrphanParent(id.clone()));
                }
            }
            if let Some(linked) = &r.links.parent {
                if Some(linked) != r.id.parent().as_ref() {
                    violations.push(Violation::ParentMismatch {
                        id: id.clone(),
                        linked: linked.canonical(),
                    });
                }
            }
            let mut check_link = |to: &PatternId, kind: LinkKind| {
                if !ids.contains_key(&to.canonical()) {
                    violations.push(Violation::DanglingLink {
                        from: id.clone(),
                        to: to.canonical(),
                        kind,
                    });
                }
            };
            for to in &r.links.related {
                check_link(to, LinkKind::Related);
            }
            for to in &r.links.hybrid_of {
                check_link(to, LinkKind::HybridOf);
            }
            if let Some(to) = &r.links.derived_from {
                check_link(to, LinkKind::DerivedFrom);
            }
            if r.links.hybrid_of.len() == 1 {
                violations.push(Violation::HybridArity(id.clone()));
            }
            if r.links.derived_from.is_some() && r.id.kind == PatternKind::Embedding {
                violations.push(Violation::DerivedFromOnEmbedding(id.clone()));
            }
            let text = &r.name.text;
            if text.trim().is_empty() {
                violations.push(Violation::NamingConvention {
                    id: id.clone(),
                    reason: "name text is empty".into(),
                });
            } else if text.trim() != text {
                violations.push(Violation::NamingConvention {
                    id: id.clone(),
                    reason: "name text has surrounding whitespace".into(),
                });
            } else if PatternId::parse(text.split([' ', '.']).next().unwrap_or("")).is_ok() {
                violations.push(Violation::NamingConvention {
                    id: id.clone(),
                    reason: "name text repeats the pattern number".into(),
                });
            }
        }
        violations
    }
}
