//! word2concept: greedy merging of embedding-similar lemmas into shared
//! concept tokens, and application of the resulting map to token streams.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::embeddings::EmbeddingTable;

pub const CONCEPT_PREFIX: &str = "CONCEPT_";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum BocError {
    #[error("concept config error: {0}")]
    Config(String),
    #[error("concept map file: {0}")]
    Format(String),
}

/// An element of a concept-mapped stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConceptToken {
    Concept(u32),
    Lemma(String),
    Placeholder(String),
}

/// Entity placeholders are type names, which start with an uppercase ASCII
/// letter; lemmas are lowercase.
pub fn is_placeholder(term: &str) -> bool {
    term.starts_with(|c: char| c.is_ascii_uppercase()) && !is_concept(term)
}

fn is_concept(term: &str) -> bool {
    term.strip_prefix(CONCEPT_PREFIX)
        .is_some_and(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()))
}

impl ConceptToken {
    pub fn parse(term: &str) -> ConceptToken {
        if is_concept(term) {
            if let Ok(k) = term[CONCEPT_PREFIX.len()..].parse() {
                return ConceptToken::Concept(k);
            }
        }
        if is_placeholder(term) {
            ConceptToken::Placeholder(term.to_string())
        } else {
            ConceptToken::Lemma(term.to_string())
        }
    }
}

impl fmt::Display for ConceptToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptToken::Concept(k) => write!(f, "{CONCEPT_PREFIX}{k}"),
            ConceptToken::Lemma(s) | ConceptToken::Placeholder(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptMap {
    pub mu: f64,
    pub embedding_label: String,
    mapping: BTreeMap<String, u32>,
    /// `seeds[k - 1]` is the seed lemma of concept `k`.
    seeds: Vec<String>,
    /// Lemmas of L in the order they were visited, mapped or not.
    pub build_order: Vec<String>,
    build_order_hash: String,
}

impl ConceptMap {
    /// A map with no concepts; applying it is the identity.
    pub fn empty(mu: f64, embedding_label: &str) -> Self {
        ConceptMap {
            mu,
            embedding_label: embedding_label.to_string(),
            mapping: BTreeMap::new(),
            seeds: Vec::new(),
            build_order: Vec::new(),
            build_order_hash: hash_order(&[]),
        }
    }

    pub fn concept_of(&self, lemma: &str) -> Option<u32> {
        self.mapping.get(lemma).copied()
    }

    pub fn seed(&self, concept: u32) -> Option<&str> {
        self.seeds.get(concept.checked_sub(1)? as usize).map(String::as_str)
    }

    pub fn concept_count(&self) -> usize {
        self.seeds.len()
    }

    pub fn mapped_count(&self) -> usize {
        self.mapping.len()
    }

    pub fn mapping(&self) -> &BTreeMap<String, u32> {
        &self.mapping
    }

    /// Members of each concept (seed included), sorted, indexed by id - 1.
    pub fn members(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new(); self.seeds.len()];
        for (lemma, &k) in &self.mapping {
            out[(k - 1) as usize].push(lemma.clone());
        }
        out
    }

    pub fn build_order_hash(&self) -> &str {
        &self.build_order_hash
    }

    pub fn to_json(&self) -> String {
        let file = MapFile {
            version: FORMAT_VERSION,
            mu: self.mu,
            embedding_label: self.embedding_label.clone(),
            build_order_hash: self.build_order_hash.clone(),
            concepts: self
                .members()
                .into_iter()
                .enumerate()
                .map(|(i, members)| ConceptEntry {
                    id: i as u32 + 1,
                    seed: self.seeds[i].clone(),
                    members,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("concept map serializes")
    }

    pub fn from_json(raw: &str) -> Result<Self, BocError> {
        let file: MapFile = serde_json::from_str(raw).map_err(|e| BocError::Format(e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return Err(BocError::Format(format!("unsupported version {}", file.version)));
        }
        check_mu(file.mu)?;
        let mut mapping = BTreeMap::new();
        let mut seeds = Vec::new();
        for (i, c) in file.concepts.into_iter().enumerate() {
            if c.id as usize != i + 1 {
                return Err(BocError::Format(format!("concept ids must run 1..n, found {}", c.id)));
            }
            if c.members.len() < 2 || !c.members.contains(&c.seed) {
                return Err(BocError::Format(format!(
                    "concept {} needs the seed and at least one other member",
                    c.id
                )));
            }
            for m in c.members {
                if mapping.insert(m.clone(), c.id).is_some() {
                    return Err(BocError::Format(format!("lemma {m} is in two concepts")));
                }
            }
            seeds.push(c.seed);
        }
        Ok(ConceptMap {
            mu: file.mu,
            embedding_label: file.embedding_label,
            mapping,
            seeds,
            build_order: Vec::new(),
            build_order_hash: file.build_order_hash,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ConceptEntry {
    id: u32,
    seed: String,
    members: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    version: u32,
    mu: f64,
    embedding_label: String,
    build_order_hash: String,
    concepts: Vec<ConceptEntry>,
}

fn hash_order(order: &[String]) -> String {
    let mut h = Sha256::new();
    for w in order {
        h.update(w.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..16])
}

fn check_mu(mu: f64) -> Result<(), BocError> {
    if mu > 0.0 && mu <= 1.0 {
        Ok(())
    } else {
        Err(BocError::Config(format!("mu must lie in (0, 1], got {mu}")))
    }
}

/// Distinct lemmas of the given streams by descending frequency, ties
/// lexicographic. Placeholders and concept tokens are left out.
pub fn lemma_order<'a, I>(streams: I) -> Vec<String>
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for s in streams {
        for w in s {
            if !is_placeholder(w) && !is_concept(w) {
                *freq.entry(w.as_str()).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.into_iter().map(|(w, _)| w.to_string()).collect()
}

/// Greedy word2concept. Each unmapped lemma of `lemmas` that has a vector
/// seeds a new concept if any other unmapped vocabulary word reaches cosine
/// `mu` with it; all such words join that concept. Members are not expanded
/// further.
pub fn build_concept_map(lemmas: &[String], table: &EmbeddingTable, mu: f64) -> Result<ConceptMap, BocError> {
    check_mu(mu)?;
    let mut map = ConceptMap::empty(mu, &table.label);
    let mut seen = std::collections::HashSet::new();
    for w in lemmas {
        if !seen.insert(w.as_str()) {
            return Err(BocError::Config(format!("lemma list repeats {w}")));
        }
        map.build_order.push(w.clone());
        if map.mapping.contains_key(w) || !table.contains(w) {
            continue;
        }
        let absorbed: Vec<String> = table
            .synonyms(w, mu)
            .expect("word is in the table")
            .into_iter()
            .map(|(wi, _)| wi)
            .filter(|wi| !map.mapping.contains_key(wi))
            .collect();
        if absorbed.is_empty() {
            continue;
        }
        let id = map.seeds.len() as u32 + 1;
        map.seeds.push(w.clone());
        map.mapping.insert(w.clone(), id);
        for wi in absorbed {
            map.mapping.insert(wi, id);
        }
    }
    map.build_order_hash = hash_order(&map.build_order);
    Ok(map)
}

pub fn apply_concept_map(map: &ConceptMap, stream: &[String]) -> Vec<ConceptToken> {
    stream
        .iter()
        .map(|w| {
            if is_placeholder(w) {
                ConceptToken::Placeholder(w.clone())
            } else if let Some(k) = map.concept_of(w) {
                ConceptToken::Concept(k)
            } else {
                ConceptToken::Lemma(w.clone())
            }
        })
        .collect()
}

/// Rendered form of [`apply_concept_map`].
pub fn map_terms(map: &ConceptMap, stream: &[String]) -> Vec<String> {
    apply_concept_map(map, stream).iter().map(ToString::to_string).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptSummary {
    pub id: u32,
    pub seed: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConceptStats {
    pub concepts: usize,
    pub mapped_lemmas: usize,
    /// concept size -> number of concepts of that size
    pub size_histogram: BTreeMap<usize, usize>,
    /// Up to ten concepts, largest first, ties by id.
    pub largest: Vec<ConceptSummary>,
}

pub fn concept_stats(map: &ConceptMap) -> ConceptStats {
    let members = map.members();
    let mut size_histogram = BTreeMap::new();
    for m in &members {
        *size_histogram.entry(m.len()).or_insert(0) += 1;
    }
    let mut largest: Vec<ConceptSummary> = members
        .into_iter()
        .enumerate()
        .map(|(i, members)| ConceptSummary {
            id: i as u32 + 1,
            seed: map.seeds[i].clone(),
            members,
        })
        .collect();
    largest.sort_by(|a, b| b.members.len().cmp(&a.members.len()).then(a.id.cmp(&b.id)));
    largest.truncate(10);
    ConceptStats {
        concepts: map.concept_count(),
        mapped_lemmas: map.mapped_count(),
        size_histogram,
        largest,
    }
}
