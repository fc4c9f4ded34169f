use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityType {
    pub name: String,
    pub abbreviation: String,
}

/// Type signature of a binary relation. An argument slot may admit several
/// entity types (written `CF/TR` in tabular form).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationSchema {
    pub name: String,
    pub left: BTreeSet<String>,
    pub right: BTreeSet<String>,
}

impl RelationSchema {
    pub fn new<L, R>(name: &str, left: L, right: R) -> Self
    where
        L: IntoIterator,
        L::Item: Into<String>,
        R: IntoIterator,
        R::Item: Into<String>,
    {
        RelationSchema {
            name: name.to_string(),
            left: left.into_iter().map(Into::into).collect(),
            right: right.into_iter().map(Into::into).collect(),
        }
    }

    pub fn admits(&self, left_type: &str, right_type: &str) -> bool {
        self.left.contains(left_type) && self.right.contains(right_type)
    }

    /// Orients a pair of mention types for this relation. `first` and `second`
    /// are in document order; returns `Some(false)` when `first` fills the left
    /// slot, `Some(true)` when the pair must be swapped and `None` when the
    /// types do not fit. Document order wins when both orientations fit.
    pub fn orient(&self, first: &str, second: &str) -> Option<bool> {
        if self.admits(first, second) {
            Some(false)
        } else if self.admits(second, first) {
            Some(true)
        } else {
            None
        }
    }
}

impl fmt::Display for RelationSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join("/");
        write!(f, "{}({}, {})", self.name, join(&self.left), join(&self.right))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Schema {
    pub entity_types: Vec<EntityType>,
    pub relations: Vec<RelationSchema>,
}

impl Schema {
    pub fn entity_type(&self, name: &str) -> Option<&EntityType> {
        self.entity_types.iter().find(|t| t.name == name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationSchema> {
        self.relations.iter().find(|r| r.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(CorpusError::Schema(m));
        let mut names = HashSet::new();
        let mut abbrevs = HashSet::new();
        for t in &self.entity_types {
            if t.name.is_empty() {
                return err("entity type with empty name".into());
            }
            // Entity types double as placeholder tokens in instance contexts,
            // which are told apart from (lowercase) lemmas by their first letter.
            if !t.name.starts_with(|c: char| c.is_ascii_uppercase())
                || t.name.chars().any(char::is_whitespace)
                || t.name.starts_with("CONCEPT_")
            {
                return err(format!(
                    "entity type name {:?} must start with an uppercase ASCII letter, contain no whitespace and not use the CONCEPT_ prefix",
                    t.name
                ));
            }
            if !names.insert(t.name.as_str()) {
                return err(format!("duplicate entity type {}", t.name));
            }
            if !abbrevs.insert(t.abbreviation.as_str()) {
                return err(format!("duplicate abbreviation {}", t.abbreviation));
            }
        }
        let mut rels = HashSet::new();
        for r in &self.relations {
            if r.name.is_empty() || r.name.chars().any(char::is_whitespace) {
                return err(format!("invalid relation name {:?}", r.name));
            }
            if !rels.insert(r.name.as_str()) {
                return err(format!("duplicate relation {}", r.name));
            }
            if r.left.is_empty() || r.right.is_empty() {
                return err(format!("relation {} has an empty argument type set", r.name));
            }
            for t in r.left.iter().chain(&r.right) {
                if !names.contains(t.as_str()) {
                    return err(format!("relation {} uses unknown entity type {}", r.name, t));
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Schema> {
        let raw = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let schema: Schema = serde_json::from_str(&raw).map_err(|e| CorpusError::Parse {
            file: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes") + "\n"
    }
}
