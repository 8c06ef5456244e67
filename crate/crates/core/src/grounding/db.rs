//! Landmark database: proposition keys with their serialized attributes.
//!
//! On disk it is a JSON object from landmark name to attribute object, e.g.
//! `{"Jiaho supermarket": {"shop": "supermarket", "addr:street": "Washington Street"}}`.
//! Names are normalized into proposition keys (`jiaho_supermarket`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::ltl::Prop;

use super::GroundingError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticEntry {
    pub key: Prop,
    /// The landmark name as written in the database file.
    pub name: String,
    pub attributes: BTreeMap<String, Value>,
}

impl SemanticEntry {
    /// Text that gets embedded for grounding: the name followed by
    /// `attr: value` pairs in key order.
    pub fn serialize_info(&self) -> String {
        let mut s = self.name.clone();
        for (k, v) in &self.attributes {
            s.push_str(", ");
            s.push_str(k);
            s.push_str(": ");
            match v {
                Value::String(t) => s.push_str(t),
                other => s.push_str(&other.to_string()),
            }
        }
        s
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SemanticDB {
    entries: BTreeMap<Prop, SemanticEntry>,
}

/// `"Jiaho supermarket"` → `jiaho_supermarket`. Runs of anything outside
/// `[a-z0-9]` collapse to one underscore.
pub fn normalize_key(name: &str) -> String {
    let mut out = String::new();
    let mut gap = false;
    for c in name.chars().flat_map(char::to_lowercase) {
        if c.is_ascii_alphanumeric() {
            if gap && !out.is_empty() {
                out.push('_');
            }
            gap = false;
            out.push(c);
        } else {
            gap = true;
        }
    }
    out
}

impl SemanticDB {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, attributes: BTreeMap<String, Value>) -> Result<&SemanticEntry, GroundingError> {
        let key = Prop::new(normalize_key(name)).map_err(|_| GroundingError::InvalidKey(name.to_string()))?;
        if self.entries.contains_key(&key) {
            return Err(GroundingError::DuplicateKey(key.to_string()));
        }
        let entry = SemanticEntry { key: key.clone(), name: name.to_string(), attributes };
        Ok(self.entries.entry(key).or_insert(entry))
    }

    pub fn from_json(value: &Value) -> Result<Self, GroundingError> {
        let obj = value.as_object().ok_or_else(|| GroundingError::Format("database must be a JSON object".into()))?;
        let mut db = SemanticDB::new();
        for (name, attrs) in obj {
            let attrs = match attrs {
                Value::Object(m) => m.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
                Value::Null => BTreeMap::new(),
                _ => return Err(GroundingError::Format(format!("attributes of `{name}` must be an object"))),
            };
            db.insert(name, attrs)?;
        }
        Ok(db)
    }

    pub fn from_str(text: &str) -> Result<Self, GroundingError> {
        let v: Value = serde_json::from_str(text).map_err(|e| GroundingError::Format(e.to_string()))?;
        Self::from_json(&v)
    }

    pub fn load(path: &Path) -> Result<Self, GroundingError> {
        let text = std::fs::read_to_string(path).map_err(|e| GroundingError::Io(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for e in self.entries.values() {
            m.insert(e.name.clone(), Value::Object(e.attributes.iter().map(|(k, v)| (k.clone(), v.clone())).collect()));
        }
        Value::Object(m)
    }

    pub fn get(&self, key: &Prop) -> Option<&SemanticEntry> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &Prop) -> bool {
        self.entries.contains_key(key)
    }

    /// Entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = &SemanticEntry> {
        self.entries.values()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Prop> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_landmark_file_shape() {
        let db = SemanticDB::from_str(
            r#"{"Jiaho supermarket": {"addr:housenumber": "692", "shop": "supermarket",
                "addr:street": "Washington Street"}}"#,
        )
        .unwrap();
        let key = Prop::new("jiaho_supermarket").unwrap();
        let e = db.get(&key).unwrap();
        assert_eq!(e.name, "Jiaho supermarket");
        assert_eq!(
            e.serialize_info(),
            "Jiaho supermarket, addr:housenumber: 692, addr:street: Washington Street, shop: supermarket"
        );
        assert_eq!(SemanticDB::from_json(&db.to_json()).unwrap(), db);
    }

    #[test]
    fn key_normalization() {
        assert_eq!(normalize_key("Seoul Tofu House & Korean BBQ"), "seoul_tofu_house_korean_bbq");
        assert_eq!(normalize_key("  7-Eleven "), "7_eleven");
        let mut db = SemanticDB::new();
        db.insert("Chase", BTreeMap::new()).unwrap();
        assert!(matches!(db.insert("chase!", BTreeMap::new()), Err(GroundingError::DuplicateKey(_))));
        assert!(matches!(db.insert("e", BTreeMap::new()), Err(GroundingError::InvalidKey(_))));
        assert!(matches!(db.insert("?", BTreeMap::new()), Err(GroundingError::InvalidKey(_))));
    }
}
