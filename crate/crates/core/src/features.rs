//! Bag-of-words and bag-of-concepts counts, TF-IDF weighted mean-pooled
//! sentence embeddings, and their concatenation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::boc::{is_placeholder, map_terms, ConceptMap};
use crate::embeddings::EmbeddingTable;

pub const MATRIX_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature config error: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Format { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureKind {
    #[serde(rename = "BoW")]
    Bow,
    #[serde(rename = "BoC")]
    Boc,
    #[serde(rename = "SE")]
    Se,
    #[serde(rename = "BoC+SE")]
    BocSe,
}

impl FeatureKind {
    pub const ALL: [FeatureKind; 4] = [FeatureKind::Bow, FeatureKind::Boc, FeatureKind::Se, FeatureKind::BocSe];

    pub fn is_sparse(self) -> bool {
        !matches!(self, FeatureKind::Se)
    }

    pub fn uses_concepts(self) -> bool {
        matches!(self, FeatureKind::Boc | FeatureKind::BocSe)
    }

    pub fn uses_embeddings(self) -> bool {
        matches!(self, FeatureKind::Se | FeatureKind::BocSe)
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Bow => "BoW",
            FeatureKind::Boc => "BoC",
            FeatureKind::Se => "SE",
            FeatureKind::BocSe => "BoC+SE",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = FeatureError;
    fn from_str(s: &str) -> Result<Self, FeatureError> {
        match s.to_ascii_lowercase().as_str() {
            "bow" => Ok(FeatureKind::Bow),
            "boc" => Ok(FeatureKind::Boc),
            "se" => Ok(FeatureKind::Se),
            "boc+se" | "boc-se" => Ok(FeatureKind::BocSe),
            _ => Err(FeatureError::Config(format!("unknown feature kind {s:?} (BoW, BoC, SE, BoC+SE)"))),
        }
    }
}

/// Column layout frozen at fit time. Sparse columns come first, in
/// lexicographic term order; embedding dimensions follow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub kind: FeatureKind,
    pub terms: Vec<String>,
    pub embedding_dim: usize,
    #[serde(default)]
    pub concept_map_hash: Option<String>,
    #[serde(default)]
    pub embedding_label: Option<String>,
    /// Free-form provenance, e.g. `TestFinding split 2 train`.
    pub fitted_on: String,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl FeatureSpace {
    pub fn dim(&self) -> usize {
        self.terms.len() + self.embedding_dim
    }

    pub fn sparse_dim(&self) -> usize {
        self.terms.len()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Content hash over everything that affects featurization.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind.to_string().as_bytes());
        for t in &self.terms {
            h.update([0u8]);
            h.update(t.as_bytes());
        }
        h.update([1u8]);
        h.update(self.embedding_dim.to_le_bytes());
        h.update(self.concept_map_hash.as_deref().unwrap_or("-").as_bytes());
        h.update([1u8]);
        h.update(self.embedding_label.as_deref().unwrap_or("-").as_bytes());
        hex::encode(&h.finalize()[..16])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("space serializes")
    }

    pub fn from_json(raw: &str) -> Result<Self, FeatureError> {
        let mut s: FeatureSpace =
            serde_json::from_str(raw).map_err(|e| FeatureError::Config(format!("feature space: {e}")))?;
        s.reindex()?;
        Ok(s)
    }

    fn reindex(&mut self) -> Result<(), FeatureError> {
        self.index = self.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if self.index.len() != self.terms.len() || self.terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FeatureError::Config("feature space terms must be sorted and distinct".into()));
        }
        Ok(())
    }
}

/// Sparse vector: (column, value) pairs with increasing column and nonzero
/// value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dim: usize,
    pub entries: Vec<(usize, f64)>,
}

impl FeatureVector {
    pub fn from_dense(values: &[f64]) -> Self {
        FeatureVector {
            dim: values.len(),
            entries: values.iter().copied().enumerate().filter(|&(_, v)| v != 0.0).collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &(i, x) in &self.entries {
            v[i] = x;
        }
        v
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, x)| x * w[i]).sum()
    }

    /// Inner product of two sparse vectors.
    pub fn dot_sparse(&self, other: &FeatureVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut s) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    s += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, x)| x * x).sum()
    }
}

/// Document frequencies from the fitting documents plus raw term counts of
/// every registered document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel {
    pub documents: usize,
    pub df: BTreeMap<String, usize>,
    pub tf: BTreeMap<String, BTreeMap<String, usize>>,
}

/// Fits document frequencies on `documents` (id, lemmas) and registers their
/// term counts.
pub fn fit_tfidf<'a, I>(documents: I) -> Result<TfIdfModel, FeatureError>
where
    I: IntoIterator<Item = (&'a str, &'a [String])>,
{
    let mut m = TfIdfModel::default();
    for (id, lemmas) in documents {
        m.documents += 1;
        let counts = term_counts(lemmas.iter().map(String::as_str));
        for w in counts.keys() {
            *m.df.entry(w.clone()).or_insert(0) += 1;
        }
        m.tf.insert(id.to_string(), counts);
    }
    if m.documents == 0 {
        return Err(FeatureError::Config("TF-IDF needs at least one document".into()));
    }
    Ok(m)
}

fn term_counts<'a, I: IntoIterator<Item = &'a str>>(terms: I) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for t in terms {
        *out.entry(t.to_string()).or_insert(0) += 1;
    }
    out
}

impl TfIdfModel {
    /// Adds term counts for a document that does not take part in document
    /// frequencies (dev or test letters).
    pub fn register(&mut self, id: &str, lemmas: &[String]) {
        self.tf
            .entry(id.to_string())
            .or_insert_with(|| term_counts(lemmas.iter().map(String::as_str)));
    }

    pub fn idf(&self, lemma: &str) -> f64 {
        match self.df.get(lemma) {
            Some(&df) if df > 0 => (self.documents as f64 / df as f64).ln(),
            _ => 0.0,
        }
    }

    /// tf(lemma, document) · ln(N / df(lemma)); 0 for unseen lemmas.
    pub fn score(&self, lemma: &str, document: &str) -> f64 {
        let tf = self.tf.get(document).and_then(|c| c.get(lemma)).copied().unwrap_or(0);
        tf as f64 * self.idf(lemma)
    }
}

/// Resources a feature kind may need.
#[derive(Debug, Clone, Copy, Default)]
pub struct Resources<'a> {
    pub concepts: Option<&'a ConceptMap>,
    pub embeddings: Option<&'a EmbeddingTable>,
    pub tfidf: Option<&'a TfIdfModel>,
}

impl<'a> Resources<'a> {
    fn check(&self, kind: FeatureKind, need_tfidf: bool) -> Result<(), FeatureError> {
        if kind.uses_concepts() && self.concepts.is_none() {
            return Err(FeatureError::Config(format!("{kind} features need a concept map")));
        }
        if kind.uses_embeddings() && self.embeddings.is_none() {
            return Err(FeatureError::Config(format!("{kind} features need an embedding table")));
        }
        if need_tfidf && kind.uses_embeddings() && self.tfidf.is_none() {
            return Err(FeatureError::Config(format!("{kind} features need a TF-IDF model")));
        }
        Ok(())
    }
}

fn sparse_terms(kind: FeatureKind, context: &[String], res: &Resources) -> Vec<String> {
    match (kind, res.concepts) {
        (FeatureKind::Boc | FeatureKind::BocSe, Some(m)) => map_terms(m, context),
        _ => context.to_vec(),
    }
}

/// Fits a space on training contexts. Sparse columns are every term (concept
/// token, lemma or placeholder) seen in `contexts`, sorted.
pub fn fit_space<'c, I>(
    contexts: I,
    kind: FeatureKind,
    res: &Resources,
    fitted_on: &str,
) -> Result<FeatureSpace, FeatureError>
where
    I: IntoIterator<Item = &'c [String]>,
{
    res.check(kind, false)?;
    let mut terms: Vec<String> = Vec::new();
    if kind.is_sparse() {
        let mut seen = std::collections::BTreeSet::new();
        for c in contexts {
            seen.extend(sparse_terms(kind, c, res));
        }
        terms = seen.into_iter().collect();
    }
    let mut space = FeatureSpace {
        kind,
        terms,
        embedding_dim: if kind.uses_embeddings() {
            res.embeddings.map_or(0, EmbeddingTable::dim)
        } else {
            0
        },
        concept_map_hash: if kind.uses_concepts() {
            res.concepts.map(|m| hex::encode(&Sha256::digest(m.to_json().as_bytes())[..16]))
        } else {
            None
        },
        embedding_label: if kind.uses_embeddings() {
            res.embeddings.map(|e| e.label.clone())
        } else {
            None
        },
        fitted_on: fitted_on.to_string(),
        index: HashMap::new(),
    };
    space.reindex()?;
    Ok(space)
}

/// (1/n) Σ E(w)·score(w, document) over the n context lemmas that are not
/// placeholders and have a vector. Zero vector when n = 0.
pub fn sentence_embedding(context: &[String], document: &str, table: &EmbeddingTable, tfidf: &TfIdfModel) -> Vec<f64> {
    let mut acc = vec![0.0f64; table.dim()];
    let mut n = 0usize;
    for w in context {
        if is_placeholder(w) {
            continue;
        }
        let Some(v) = table.get(w) else { continue };
        let s = tfidf.score(w, document);
        for (a, &x) in acc.iter_mut().zip(v) {
            *a += f64::from(x) * s;
        }
        n += 1;
    }
    if n > 0 {
        for a in &mut acc {
            *a /= n as f64;
        }
    }
    acc
}

/// Featurizes one context from document `document` into a frozen space.
/// Terms outside the space are dropped.
pub fn featurize(context: &[String], document: &str, space: &FeatureSpace, res: &Resources) -> Result<FeatureVector, FeatureError> {
    res.check(space.kind, true)?;
    let mut entries: Vec<(usize, f64)> = Vec::new();
    if space.kind.is_sparse() {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in sparse_terms(space.kind, context, res) {
            if let Some(c) = space.column(&t) {
                *counts.entry(c).or_insert(0.0) += 1.0;
            }
        }
        entries.extend(counts);
    }
    if space.kind.uses_embeddings() {
        let (table, tfidf) = (res.embeddings.expect("checked"), res.tfidf.expect("checked"));
        if table.dim() != space.embedding_dim {
            return Err(FeatureError::Config(format!(
                "embedding dimension {} differs from the space's {}",
                table.dim(),
                space.embedding_dim
            )));
        }
        let off = space.sparse_dim();
        let se = sentence_embedding(context, document, table, tfidf);
        entries.extend(se.into_iter().enumerate().filter(|&(_, v)| v != 0.0).map(|(i, v)| (off + i, v)));
    }
    Ok(FeatureVector {
        dim: space.dim(),
        entries,
    })
}

/// One labelled matrix row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub label: bool,
    pub x: FeatureVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub kind: FeatureKind,
    pub space_hash: String,
    pub dim: usize,
    pub rows: Vec<Row>,
}

impl Matrix {
    /// Text form:
    ///
    /// ```text
    /// # relex-features 1
    /// # kind BoC
    /// # rows 2
    /// # cols 5
    /// # space 3f2a...
    /// r 0 1 TestFinding:doc0001:T1:T2
    /// 0 3 2
    /// r 1 0 TestFinding:doc0001:T1:T4
    /// ```
    ///
    /// `r <row> <label 0|1> <instance id>` opens a row; the following
    /// `<row> <col> <value>` lines hold its nonzero entries.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# relex-features {MATRIX_VERSION}");
        let _ = writeln!(out, "# kind {}", self.kind);
        let _ = writeln!(out, "# rows {}", self.rows.len());
        let _ = writeln!(out, "# cols {}", self.dim);
        let _ = writeln!(out, "# space {}", self.space_hash);
        for (i, r) in self.rows.iter().enumerate() {
            let _ = writeln!(out, "r {i} {} {}", u8::from(r.label), r.id);
            for &(c, v) in &r.x.entries {
                let _ = writeln!(out, "{i} {c} {v}");
            }
        }
        out
    }

    pub fn parse(raw: &str, path: &str) -> Result<Self, FeatureError> {
        let err = |line: usize, message: String| FeatureError::Format {
            path: path.to_string(),
            line,
            message,
        };
        let mut header: HashMap<&str, &str> = HashMap::new();
        let mut rows: Vec<Row> = Vec::new();
        let mut dim = None;
        for (n, line) in raw.lines().enumerate() {
            let ln = n + 1;
            if let Some(h) = line.strip_prefix("# ") {
                let (k, v) = h.split_once(' ').ok_or_else(|| err(ln, "malformed header".into()))?;
                header.insert(k, v);
                if k == "cols" {
                    dim = Some(v.parse::<usize>().map_err(|e| err(ln, e.to_string()))?);
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let d = dim.ok_or_else(|| err(ln, "data before the cols header".into()))?;
            if let Some(rest) = line.strip_prefix("r ") {
                let mut it = rest.splitn(3, ' ');
                let (Some(i), Some(label), Some(id)) = (it.next(), it.next(), it.next()) else {
                    return Err(err(ln, "expected `r <row> <label> <id>`".into()));
                };
                if i.parse::<usize>().ok() != Some(rows.len()) {
                    return Err(err(ln, format!("row {i} out of order")));
                }
                let label = match label {
                    "0" => false,
                    "1" => true,
                    _ => return Err(err(ln, format!("label must be 0 or 1, got {label}"))),
                };
                rows.push(Row {
                    id: id.to_string(),
                    label,
                    x: FeatureVector { dim: d, entries: Vec::new() },
                });
                continue;
            }
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 3 {
                return Err(err(ln, "expected `<row> <col> <value>`".into()));
            }
            let i: usize = parts[0].parse().map_err(|_| err(ln, "bad row".into()))?;
            let c: usize = parts[1].parse().map_err(|_| err(ln, "bad column".into()))?;
            let v: f64 = parts[2].parse().map_err(|_| err(ln, "bad value".into()))?;
            if i + 1 != rows.len() {
                return Err(err(ln, "entry outside its row".into()));
            }
            let row = rows.last_mut().expect("checked above");
            if c >= d || !v.is_finite() || row.x.entries.last().is_some_and(|&(p, _)| p >= c) {
                return Err(err(ln, format!("column {c} invalid or out of order")));
            }
            row.x.entries.push((c, v));
        }
        let get = |k: &str| header.get(k).copied().ok_or_else(|| err(0, format!("missing `{k}` header")));
        if get("relex-features")? != MATRIX_VERSION.to_string() {
            return Err(err(1, "unsupported feature file version".into()));
        }
        let kind: FeatureKind = get("kind")?.parse()?;
        if get("rows")?.parse::<usize>().ok() != Some(rows.len()) {
            return Err(err(0, "row count does not match header".into()));
        }
        Ok(Matrix {
            kind,
            space_hash: get("space")?.to_string(),
            dim: dim.expect("cols header seen"),
            rows,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), FeatureError> {
        std::fs::write(path, self.to_text()).map_err(|source| FeatureError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self, FeatureError> {
        let p = path.display().to_string();
        let raw = std::fs::read_to_string(path).map_err(|source| FeatureError::Io { path: p.clone(), source })?;
        Self::parse(&raw, &p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boc::build_concept_map;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(4, "toy");
        t.insert("a", &[1.0, 0.0, 0.0, 0.0]);
        t.insert("c", &[1.0, 0.01, 0.0, 0.0]);
        t.insert("b", &[0.0, 1.0, 0.0, 0.0]);
        t
    }

    #[test]
    fn bow_and_boc_columns() {
        let ctx = [s(&["a", "b"]), s(&["b", "c"])];
        let res = Resources::default();
        let bow = fit_space(ctx.iter().map(Vec::as_slice), FeatureKind::Bow, &res, "t").unwrap();
        assert_eq!(bow.terms, s(&["a", "b", "c"]));
        assert_eq!(bow.dim(), 3);

        let t = table();
        let map = build_concept_map(&s(&["a", "b", "c"]), &t, 0.9).unwrap();
        let res = Resources { concepts: Some(&map), embeddings: Some(&t), tfidf: None };
        let boc = fit_space(ctx.iter().map(Vec::as_slice), FeatureKind::Boc, &res, "t").unwrap();
        assert_eq!(boc.terms, s(&["CONCEPT_1", "b"]));
        let both = fit_space(ctx.iter().map(Vec::as_slice), FeatureKind::BocSe, &res, "t").unwrap();
        assert_eq!(both.dim(), 6);
        assert!(matches!(
            fit_space(ctx.iter().map(Vec::as_slice), FeatureKind::Boc, &Resources::default(), "t"),
            Err(FeatureError::Config(_))
        ));
    }

    #[test]
    fn counts_drop_unseen_terms() {
        let ctx = [s(&["a", "b", "c"])];
        let space = fit_space(ctx.iter().map(Vec::as_slice), FeatureKind::Bow, &Resources::default(), "t").unwrap();
        let v = featurize(&s(&["a", "b", "b", "zzz"]), "d", &space, &Resources::default()).unwrap();
        assert_eq!(v.entries, vec![(0, 1.0), (1, 2.0)]);
    }

    #[test]
    fn tfidf_formula() {
        let docs = [s(&["x", "x", "y"]), s(&["y"]), s(&["y"]), s(&["y"])];
        let ids = ["d1", "d2", "d3", "d4"];
        let m = fit_tfidf(ids.iter().copied().zip(docs.iter().map(Vec::as_slice))).unwrap();
        assert!((m.score("x", "d1") - 2.0 * 4f64.ln()).abs() < 1e-12);
        assert_eq!(m.score("y", "d1"), 0.0);
        assert_eq!(m.score("never", "d1"), 0.0);
        assert!(fit_tfidf(std::iter::empty()).is_err());
    }

    #[test]
    fn single_lemma_embedding_is_scaled_vector() {
        let t = table();
        let docs = [s(&["a", "a"]), s(&["b"])];
        let m = fit_tfidf([("d1", docs[0].as_slice()), ("d2", docs[1].as_slice())]).unwrap();
        let e = sentence_embedding(&s(&["TestName", "a", "unknown"]), "d1", &t, &m);
        let want = 2.0 * 2f64.ln();
        assert_eq!(e, vec![want, 0.0, 0.0, 0.0]);
        assert_eq!(sentence_embedding(&s(&["TestName"]), "d1", &t, &m), vec![0.0; 4]);
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = Matrix {
            kind: FeatureKind::BocSe,
            space_hash: "abc".into(),
            dim: 5,
            rows: vec![
                Row { id: "R:d:T1:T2".into(), label: true, x: FeatureVector { dim: 5, entries: vec![(0, 2.0), (4, -0.1 / 3.0)] } },
                Row { id: "R:d:T1:T3".into(), label: false, x: FeatureVector { dim: 5, entries: vec![] } },
            ],
        };
        let back = Matrix::parse(&m.to_text(), "mem").unwrap();
        assert_eq!(back, m);
        assert!(Matrix::parse("# cols 2\nr 0 1 x\n0 5 1\n", "mem").is_err());
    }
}
