//! Per-relation binary datasets, seeded 6:1:3 splits and nested
//! learning-curve subsets.
//!
//! Splitting is by instance, not by document, so two instances from the same
//! letter can land in different members of a split.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{char_slice, mentions_in_order, Corpus, Document, EntityMention};
use crate::textproc::{DocumentLayout, TextNormalizer};

pub const DEFAULT_MIN_COUNT: usize = 10;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{relation}: {n} instances, at least {min} needed to split")]
    TooSmall { relation: String, n: usize, min: usize },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationInstance {
    pub id: String,
    pub relation: String,
    pub document: String,
    pub left: String,
    pub right: String,
    /// Content lemmas with each argument replaced by its type name.
    pub context: Vec<String>,
    pub raw_context: String,
    pub label: Label,
    pub cross_sentence: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub corpus: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDataset {
    pub relation: String,
    pub instances: Vec<RelationInstance>,
    pub provenance: Provenance,
}

impl RelationDataset {
    pub fn positives(&self) -> usize {
        self.instances.iter().filter(|i| i.label.is_positive()).count()
    }

    pub fn get(&self, id: &str) -> Option<&RelationInstance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<(), DatasetError> {
        let io = |source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut f = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
        for i in &self.instances {
            serde_json::to_writer(&mut f, i).expect("instance serializes");
            f.write_all(b"\n").map_err(io)?;
        }
        f.flush().map_err(io)
    }

    pub fn read_jsonl(relation: &str, provenance: Provenance, path: &Path) -> Result<Self, DatasetError> {
        let p = path.display().to_string();
        let f = fs::File::open(path).map_err(|source| DatasetError::Io { path: p.clone(), source })?;
        let mut instances = Vec::new();
        for (n, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(|source| DatasetError::Io { path: p.clone(), source })?;
            if line.trim().is_empty() {
                continue;
            }
            let inst: RelationInstance = serde_json::from_str(&line).map_err(|e| DatasetError::Format {
                path: p.clone(),
                message: format!("line {}: {e}", n + 1),
            })?;
            if inst.relation != relation {
                return Err(DatasetError::Format {
                    path: p.clone(),
                    message: format!("line {}: relation {} in {relation} dataset", n + 1, inst.relation),
                });
            }
            instances.push(inst);
        }
        Ok(RelationDataset {
            relation: relation.to_string(),
            instances,
            provenance,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDiagnostics {
    pub annotations: usize,
    pub positives: usize,
    pub negatives: usize,
    /// Gold pairs whose mentions are more than one sentence apart.
    pub excluded_far_apart: usize,
    /// Annotations repeating an already annotated pair.
    pub duplicate_annotations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub min_count: usize,
    pub relations: BTreeMap<String, RelationDiagnostics>,
    /// Relations dropped by the minimum-count filter.
    pub dropped: Vec<String>,
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn overlaps(t_start: usize, t_end: usize, m: &EntityMention) -> bool {
    t_start < m.end && m.start < t_end
}

/// Context lemmas for the pair (`a`, `b`) over sentences `s0..=s1`: content
/// tokens touching neither argument, with one type-name placeholder at each
/// argument's start offset.
fn build_context(
    layout: &DocumentLayout,
    s0: usize,
    s1: usize,
    a: &EntityMention,
    b: &EntityMention,
) -> Vec<String> {
    let mut items: Vec<(usize, u8, String)> = Vec::new();
    for s in &layout.sentences[s0..=s1] {
        for t in &s.tokens {
            if t.is_content() && !overlaps(t.start, t.end, a) && !overlaps(t.start, t.end, b) {
                items.push((t.start, 2, t.lemma.clone()));
            }
        }
    }
    items.push((a.start, 0, a.entity_type.clone()));
    items.push((b.start, 1, b.entity_type.clone()));
    items.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
    items.into_iter().map(|(_, _, w)| w).collect()
}

/// One dataset per relation type with at least `min_count` gold annotations.
/// Candidates are type-compatible mention pairs in one sentence or in two
/// adjacent sentences; a candidate is positive iff some annotation of that
/// relation links the two mentions (in either direction).
pub fn build_datasets(
    corpus: &Corpus,
    normalizer: &TextNormalizer,
    min_count: usize,
) -> (Vec<RelationDataset>, Diagnostics) {
    let provenance = Provenance {
        corpus: corpus.fingerprint(),
        config_hash: config_hash(min_count),
    };
    let mut diag = Diagnostics {
        min_count,
        ..Default::default()
    };
    let mut kept = Vec::new();
    for rel in &corpus.schema.relations {
        let annotations = corpus
            .documents
            .iter()
            .flat_map(|d| &d.relations)
            .filter(|r| r.relation == rel.name)
            .count();
        diag.relations.entry(rel.name.clone()).or_default().annotations = annotations;
        if annotations == 0 || annotations < min_count {
            if annotations > 0 {
                diag.dropped.push(rel.name.clone());
            }
            continue;
        }
        kept.push(rel.name.clone());
    }
    let mut datasets: BTreeMap<String, Vec<RelationInstance>> =
        kept.iter().map(|r| (r.clone(), Vec::new())).collect();
    for doc in &corpus.documents {
        let layout = DocumentLayout::new(doc, normalizer);
        for name in &kept {
            let d = diag.relations.get_mut(name).expect("entry created above");
            let out = datasets.get_mut(name).expect("entry created above");
            document_instances(corpus, doc, &layout, name, out, d);
        }
    }
    let datasets = kept
        .into_iter()
        .map(|relation| RelationDataset {
            instances: datasets.remove(&relation).unwrap_or_default(),
            relation,
            provenance: provenance.clone(),
        })
        .collect();
    (datasets, diag)
}

fn document_instances(
    corpus: &Corpus,
    doc: &Document,
    layout: &DocumentLayout,
    relation: &str,
    out: &mut Vec<RelationInstance>,
    diag: &mut RelationDiagnostics,
) {
    let schema = corpus.schema.relation(relation).expect("kept relations exist");
    let mut gold: HashSet<(String, String)> = HashSet::new();
    for r in doc.relations.iter().filter(|r| r.relation == relation) {
        if !gold.insert(unordered(&r.left, &r.right)) {
            diag.duplicate_annotations += 1;
            continue;
        }
        let (a, b) = (layout.sentence_of(&r.left), layout.sentence_of(&r.right));
        if let (Some(a), Some(b)) = (a, b) {
            if a.abs_diff(b) > 1 {
                diag.excluded_far_apart += 1;
            }
        }
    }
    let ms = mentions_in_order(doc);
    for (i, &m1) in ms.iter().enumerate() {
        for &m2 in &ms[i + 1..] {
            let Some(swap) = schema.orient(&m1.entity_type, &m2.entity_type) else {
                continue;
            };
            let (Some(s1), Some(s2)) = (layout.sentence_of(&m1.id), layout.sentence_of(&m2.id)) else {
                continue;
            };
            if s2 > s1 + 1 {
                continue;
            }
            let (left, right) = if swap { (m2, m1) } else { (m1, m2) };
            let label = if gold.contains(&unordered(&m1.id, &m2.id)) {
                diag.positives += 1;
                Label::Positive
            } else {
                diag.negatives += 1;
                Label::Negative
            };
            let raw_context = (s1..=s2)
                .map(|s| char_slice(&doc.text, layout.sentences[s].start, layout.sentences[s].end))
                .collect::<Vec<_>>()
                .join(" ");
            out.push(RelationInstance {
                id: format!("{relation}:{}:{}:{}", doc.id, left.id, right.id),
                relation: relation.to_string(),
                document: doc.id.clone(),
                left: left.id.clone(),
                right: right.id.clone(),
                context: build_context(layout, s1, s2, m1, m2),
                raw_context,
                label,
                cross_sentence: s1 != s2,
            });
        }
    }
}

fn config_hash(min_count: usize) -> String {
    let cfg = serde_json::json!({ "min_count": min_count, "scope": "adjacent-sentences" });
    hex::encode(&Sha256::digest(cfg.to_string().as_bytes())[..8])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitTriple {
    /// 1, 2 or 3.
    pub split: u8,
    pub seed: u64,
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
}

/// Train/dev/test sizes for `n` items at 6:1:3. Each set gets the floor of
/// its share; the first leftover item goes to train and a second one to
/// whichever of dev and test lost the larger fraction.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let (mut train, mut dev, mut test) = (6 * n / 10, n / 10, 3 * n / 10);
    let mut left = n - train - dev - test;
    if left > 0 {
        train += 1;
        left -= 1;
    }
    if left > 0 {
        if (n % 10) > (3 * n % 10) {
            dev += 1;
        } else {
            test += 1;
        }
    }
    (train, dev, test)
}

pub fn make_splits(dataset: &RelationDataset, seeds: [u64; 3]) -> Result<Vec<SplitTriple>, DatasetError> {
    let n = dataset.instances.len();
    if n < DEFAULT_MIN_COUNT {
        return Err(DatasetError::TooSmall {
            relation: dataset.relation.clone(),
            n,
            min: DEFAULT_MIN_COUNT,
        });
    }
    let (n_train, n_dev, _) = split_sizes(n);
    Ok(seeds
        .iter()
        .enumerate()
        .map(|(i, &seed)| {
            let mut ids: Vec<String> = dataset.instances.iter().map(|x| x.id.clone()).collect();
            ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let test = ids.split_off(n_train + n_dev);
            let dev = ids.split_off(n_train);
            SplitTriple {
                split: i as u8 + 1,
                seed,
                train: ids,
                dev,
                test,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitFile {
    pub relation: String,
    pub splits: Vec<SplitTriple>,
}

impl SplitFile {
    pub fn write(&self, path: &Path) -> Result<(), DatasetError> {
        let json = serde_json::to_string_pretty(self).expect("splits serialize");
        fs::write(path, json + "\n").map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self, DatasetError> {
        let p = path.display().to_string();
        let raw = fs::read_to_string(path).map_err(|source| DatasetError::Io { path: p.clone(), source })?;
        let f: SplitFile = serde_json::from_str(&raw).map_err(|e| DatasetError::Format {
            path: p.clone(),
            message: e.to_string(),
        })?;
        for s in &f.splits {
            let mut all = BTreeSet::new();
            for id in s.train.iter().chain(&s.dev).chain(&s.test) {
                if !all.insert(id) {
                    return Err(DatasetError::Format {
                        path: p.clone(),
                        message: format!("split {}: {id} appears twice", s.split),
                    });
                }
            }
        }
        Ok(f)
    }
}

/// round(k·n/10) with halves rounded up, for k = 1..=9.
pub fn curve_sizes(n: usize) -> [usize; 9] {
    std::array::from_fn(|i| (2 * (i + 1) * n + 10) / 20)
}

/// Nine nested subsets of `train` (10% .. 90%): prefixes of one seeded
/// permutation.
pub fn learning_curve_fractions(train: &[String], seed: u64) -> Vec<Vec<String>> {
    let mut order = train.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    curve_sizes(train.len()).iter().map(|&k| order[..k].to_vec()).collect()
}
