//! Annotated documents, the relation schema, a line-oriented standoff
//! reader/writer and a seeded synthetic corpus generator.

mod schema;
mod standoff;
mod synth;

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use schema::{EntityType, RelationSchema, Schema};
pub use standoff::{
    load_corpus, load_standoff, parse_standoff, write_corpus, write_standoff, SCHEMA_FILE,
};
pub use synth::{generate_synthetic_corpus, GeneratorConfig, RelationSpec, TypeLexicon};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("integrity error in {document}: {message}")]
    Integrity { document: String, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("generator config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// A typed entity span. Offsets count characters, not bytes, and are half-open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityMention {
    pub id: String,
    pub entity_type: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationAnnotation {
    pub id: String,
    pub relation: String,
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub mentions: Vec<EntityMention>,
    pub relations: Vec<RelationAnnotation>,
}

impl Document {
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    pub fn mention(&self, id: &str) -> Option<&EntityMention> {
        self.mentions.iter().find(|m| m.id == id)
    }

    /// Text between two character offsets.
    pub fn slice(&self, start: usize, end: usize) -> &str {
        char_slice(&self.text, start, end)
    }

    /// Checks span bounds, surfaces, id uniqueness and relation arguments
    /// against `schema`.
    pub fn validate(&self, schema: &Schema) -> Result<()> {
        let len = self.char_len();
        let integrity = |message: String| CorpusError::Integrity {
            document: self.id.clone(),
            message,
        };
        let mut seen = HashSet::new();
        let well_formed = |id: &str, prefix: char| {
            id.len() >= 2 && id.starts_with(prefix) && !id.chars().any(char::is_whitespace)
        };
        for m in &self.mentions {
            if !well_formed(&m.id, 'T') {
                return Err(integrity(format!("mention id {:?} must look like T<n>", m.id)));
            }
            if !seen.insert(m.id.as_str()) {
                return Err(integrity(format!("duplicate mention id {}", m.id)));
            }
            if m.start >= m.end || m.end > len {
                return Err(integrity(format!(
                    "mention {} span {}..{} out of bounds for text of {} characters",
                    m.id, m.start, m.end, len
                )));
            }
            if self.slice(m.start, m.end) != m.surface {
                return Err(integrity(format!(
                    "mention {} surface {:?} does not match text {:?}",
                    m.id,
                    m.surface,
                    self.slice(m.start, m.end)
                )));
            }
            if schema.entity_type(&m.entity_type).is_none() {
                return Err(CorpusError::Schema(format!(
                    "{}: mention {} has unknown entity type {}",
                    self.id, m.id, m.entity_type
                )));
            }
        }
        let mut rel_ids = HashSet::new();
        for r in &self.relations {
            if !well_formed(&r.id, 'R') {
                return Err(integrity(format!("relation id {:?} must look like R<n>", r.id)));
            }
            if !rel_ids.insert(r.id.as_str()) {
                return Err(integrity(format!("duplicate relation id {}", r.id)));
            }
            let left = self
                .mention(&r.left)
                .ok_or_else(|| integrity(format!("relation {} references unknown mention {}", r.id, r.left)))?;
            let right = self
                .mention(&r.right)
                .ok_or_else(|| integrity(format!("relation {} references unknown mention {}", r.id, r.right)))?;
            let rel = schema.relation(&r.relation).ok_or_else(|| {
                CorpusError::Schema(format!("{}: unknown relation {}", self.id, r.relation))
            })?;
            if !rel.admits(&left.entity_type, &right.entity_type) {
                return Err(CorpusError::Schema(format!(
                    "{}: relation {} {}({}, {}) violates signature {}",
                    self.id, r.id, r.relation, left.entity_type, right.entity_type, rel
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub schema: Schema,
    pub documents: Vec<Document>,
}

impl Corpus {
    pub fn new(schema: Schema, documents: Vec<Document>) -> Result<Self> {
        let corpus = Corpus { schema, documents };
        corpus.validate()?;
        Ok(corpus)
    }

    pub fn validate(&self) -> Result<()> {
        self.schema.validate()?;
        let mut ids = BTreeSet::new();
        for d in &self.documents {
            if !ids.insert(d.id.as_str()) {
                return Err(CorpusError::Integrity {
                    document: d.id.clone(),
                    message: "duplicate document id".into(),
                });
            }
            d.validate(&self.schema)?;
        }
        Ok(())
    }

    pub fn document(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn relation_count(&self) -> usize {
        self.documents.iter().map(|d| d.relations.len()).sum()
    }

    /// Stable content hash over the standoff rendering of every document.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&self.schema).expect("schema serializes"));
        for d in &self.documents {
            let (text, ann) = write_standoff(d);
            h.update(d.id.as_bytes());
            h.update([0u8]);
            h.update(text.as_bytes());
            h.update([0u8]);
            h.update(ann.as_bytes());
        }
        hex::encode(&h.finalize()[..16])
    }
}

/// Mentions sorted by start offset, then end offset, then id.
pub fn mentions_in_order(doc: &Document) -> Vec<&EntityMention> {
    let mut ms: Vec<&EntityMention> = doc.mentions.iter().collect();
    ms.sort_by(|a, b| (a.start, a.end, &a.id).cmp(&(b.start, b.end, &b.id)));
    ms
}

pub(crate) fn char_slice(text: &str, start: usize, end: usize) -> &str {
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let b0 = indices.by_ref().nth(start).unwrap_or(text.len());
    let b1 = if end > start {
        indices.nth(end - start - 1).unwrap_or(text.len())
    } else {
        b0
    };
    &text[b0..b1]
}
