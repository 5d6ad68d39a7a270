//! Catalog file format: UTF-8 JSON with a `plml_version` marker and a
//! `records` array. Canonical form sorts records by their canonical ID
//! string and object keys lexicographically; unknown fields are kept.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{Catalog, CatalogError, PatternRecord};

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    plml_version: String,
    records: Vec<PatternRecord>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

pub fn load_catalog(bytes: &[u8]) -> Result<Catalog, CatalogError> {
    let file: CatalogFile = serde_json::from_slice(bytes).map_err(|e| {
        CatalogError::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    Ok(Catalog {
        plml_version: file.plml_version,
        records: file.records,
        extra: file.extra,
    })
}

/// Serialize to canonical bytes. Going through `serde_json::Value` sorts
/// every object's keys (the default `Map` is a BTreeMap); records are
/// sorted here by canonical ID.
pub fn save_catalog(catalog: &Catalog) -> Vec<u8> {
    let mut records = catalog.records.clone();
    records.sort_by_key(|r| r.id.canonical());
    let file = CatalogFile {
        plml_version: catalog.plml_version.clone(),
        records,
        extra: catalog.extra.clone(),
    };
    let value = serde_json::to_value(&file).expect("catalog serializes");
    let mut bytes = serde_json::to_vec_pretty(&value).expect("catalog renders");
    bytes.push(b'\n');
    bytes
}

impl Catalog {
    /// Records ordered by canonical ID, as `save_catalog` writes them.
    pub fn sorted_records(&self) -> Vec<&PatternRecord> {
        let mut refs: Vec<&PatternRecord> = self.records.iter().collect();
        refs.sort_by_key(|r| r.id.canonical());
        refs
    }
}

#[cfg(test)]
mod tests {
    use super::super::seed_catalog;
    use super::*;

    #[test]
    fn seed_round_trips() {
        let seed = seed_catalog();
        let bytes = save_catalog(&seed);
        let loaded = load_catalog(&bytes).unwrap();
        // Equality up to record order; canonical bytes are identical.
        assert_eq!(save_catalog(&loaded), bytes);
        assert_eq!(loaded.records.len(), seed.records.len());
    }

    #[test]
    fn save_load_is_byte_stable() {
        let bytes = save_catalog(&seed_catalog());
        let again = save_catalog(&load_catalog(&bytes).unwrap());
        assert_eq!(bytes, again);
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let mut bytes = save_catalog(&seed_catalog());
        bytes.truncate(bytes.len() / 2);
        assert!(matches!(
            load_catalog(&bytes),
            Err(CatalogError::Parse(_))
        ));
    }

    #[test]
    fn unknown_fields_survive_round_trip() {
        let mut catalog = seed_catalog();
        catalog.records[0]
            .extra
            .insert("illustration".into(), Value::String("fig-2.svg".into()));
        catalog
            .extra
            .insert("source".into(), Value::String("unit-test".into()));
        let bytes = save_catalog(&catalog);
        let loaded = load_catalog(&bytes).unwrap();
        let again = save_catalog(&loaded);
        assert_eq!(bytes, again);
        assert!(String::from_utf8(again).unwrap().contains("fig-2.svg"));
    }
}
