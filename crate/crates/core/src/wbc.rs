//! Window-bounded co-occurrence: predict a relation for every type-compatible
//! mention pair inside one sentence, or whose later mention sits fewer than
//! `rho` tokens into the sentence after the earlier mention's sentence.
//!
//! Distances count raw tokens (stopwords and punctuation included) of the
//! following sentence that end before the second mention starts. `rho = 0`
//! is strict intra-sentential co-occurrence, and the window never spans more
//! than two sentences.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{mentions_in_order, Document, Schema};
use crate::eval::{rule_key, Counts, GoldKey};
use crate::textproc::{DocumentLayout, TextNormalizer};

pub const DEFAULT_CANDIDATES: [usize; 3] = [0, 5, 10];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedRelation {
    pub relation: String,
    pub document: String,
    pub left: String,
    pub right: String,
    /// Sentence indices of the earlier and the later mention.
    pub window: (usize, usize),
    pub rho: usize,
}

impl PredictedRelation {
    pub fn key(&self) -> GoldKey {
        (self.relation.clone(), rule_key(&self.document, &self.left, &self.right))
    }
}

/// Predictions for one document with the same `rho` for every relation.
pub fn extract(doc: &Document, schema: &Schema, rho: usize) -> Vec<PredictedRelation> {
    let layout = DocumentLayout::new(doc, &TextNormalizer::default());
    extract_with(doc, &layout, schema, |_| rho)
}

/// Predictions for one document with a per-relation window. Output follows
/// schema order, then mention offsets.
pub fn extract_with<F>(doc: &Document, layout: &DocumentLayout, schema: &Schema, rho: F) -> Vec<PredictedRelation>
where
    F: Fn(&str) -> usize,
{
    let ms = mentions_in_order(doc);
    let mut out = Vec::new();
    for rel in &schema.relations {
        let rho = rho(&rel.name);
        for (i, &m1) in ms.iter().enumerate() {
            for &m2 in &ms[i + 1..] {
                let Some(swap) = rel.orient(&m1.entity_type, &m2.entity_type) else {
                    continue;
                };
                let (Some(s1), Some(s2)) = (layout.sentence_of(&m1.id), layout.sentence_of(&m2.id)) else {
                    continue;
                };
                let inside = s1 == s2
                    || (s2 == s1 + 1 && layout.sentences[s2].tokens_before(m2.start) < rho);
                if !inside {
                    continue;
                }
                let (left, right) = if swap { (m2, m1) } else { (m1, m2) };
                out.push(PredictedRelation {
                    relation: rel.name.clone(),
                    document: doc.id.clone(),
                    left: left.id.clone(),
                    right: right.id.clone(),
                    window: (s1, s2),
                    rho,
                });
            }
        }
    }
    out
}

/// Extracts over many documents, sorted by document id.
pub fn extract_corpus<F>(docs: &[Document], schema: &Schema, rho: F) -> Vec<PredictedRelation>
where
    F: Fn(&str) -> usize,
{
    let normalizer = TextNormalizer::default();
    let mut order: Vec<&Document> = docs.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    order
        .into_iter()
        .flat_map(|d| extract_with(d, &DocumentLayout::new(d, &normalizer), schema, &rho))
        .collect()
}

/// Gold keys of every annotation in `docs`.
pub fn gold_keys(docs: &[Document]) -> Vec<GoldKey> {
    docs.iter()
        .flat_map(|d| {
            d.relations
                .iter()
                .map(move |r| (r.relation.clone(), rule_key(&d.id, &r.left, &r.right)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoChoice {
    pub rho: usize,
    /// Dev F1 for each candidate, in candidate order.
    pub f1: Vec<(usize, f64)>,
    pub warning: Option<String>,
}

/// Picks, per relation, the candidate window with the best dev micro-F1.
/// Ties go to the smaller window; relations without dev gold get 0.
pub fn tune_rho(dev: &[Document], schema: &Schema, candidates: &[usize]) -> BTreeMap<String, RhoChoice> {
    assert!(!candidates.is_empty(), "candidate list must be nonempty");
    let mut cands = candidates.to_vec();
    cands.sort_unstable();
    cands.dedup();
    let gold = gold_keys(dev);
    let per_rho: Vec<BTreeMap<String, Counts>> = cands
        .iter()
        .map(|&rho| {
            let pred: Vec<GoldKey> = extract_corpus(dev, schema, |_| rho).iter().map(|p| p.key()).collect();
            crate::eval::score(&pred, &gold).0
        })
        .collect();
    let mut out = BTreeMap::new();
    for rel in &schema.relations {
        let has_gold = gold.iter().any(|(r, _)| *r == rel.name);
        let f1: Vec<(usize, f64)> = cands
            .iter()
            .zip(&per_rho)
            .map(|(&rho, counts)| (rho, counts.get(&rel.name).copied().unwrap_or_default().f1()))
            .collect();
        let choice = if has_gold {
            let mut best = f1[0];
            for &c in &f1[1..] {
                if c.1 > best.1 {
                    best = c;
                }
            }
            RhoChoice { rho: best.0, f1, warning: None }
        } else {
            let msg = format!("{}: no dev gold, using rho=0", rel.name);
            log::warn!("{msg}");
            RhoChoice { rho: 0, f1, warning: Some(msg) }
        };
        out.insert(rel.name.clone(), choice);
    }
    out
}

pub fn write_predictions(path: &Path, preds: &[PredictedRelation]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for p in preds {
        serde_json::to_writer(&mut f, p)?;
        f.write_all(b"\n")?;
    }
    f.flush()
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictedRelation>, String> {
    let raw = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1)))
        .collect()
}
