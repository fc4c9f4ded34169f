//! Pretrained word vectors: text-format loader, frequency-based vocabulary
//! cap, cosine similarity and exhaustive synonym search.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}: not in the embedding vocabulary")]
    NotFound(String),
    #[error("cosine undefined: {0}")]
    Domain(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Word vectors keyed by lowercase lemma. Vectors are stored in single
/// precision; similarity arithmetic accumulates in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    data: Vec<f32>,
    norms: Vec<f64>,
    index: HashMap<String, usize>,
    pub label: String,
    /// Rows dropped at load time because their norm was zero.
    pub skipped_zero_norm: usize,
}

fn norm(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt()
}

fn dot(u: &[f32], v: &[f32]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum()
}

fn cosine_parts(u: &[f32], v: &[f32], nu: f64, nv: f64) -> f64 {
    (dot(u, v) / (nu * nv)).clamp(-1.0, 1.0)
}

/// dot(u, v) / (|u| |v|), clamped to [-1, 1].
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::Domain(format!("dimensions {} and {} differ", u.len(), v.len())));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::Domain("zero-norm vector".into()));
    }
    Ok(cosine_parts(u, v, nu, nv))
}

impl EmbeddingTable {
    pub fn new(dim: usize, label: &str) -> Self {
        EmbeddingTable {
            dim,
            words: Vec::new(),
            data: Vec::new(),
            norms: Vec::new(),
            index: HashMap::new(),
            label: label.to_string(),
            skipped_zero_norm: 0,
        }
    }

    /// Adds a vector unless the (lowercased) word is present already or the
    /// vector has zero norm. Returns whether it was added.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> bool {
        assert_eq!(vector.len(), self.dim, "vector dimension");
        let key = word.to_lowercase();
        if self.index.contains_key(&key) {
            return false;
        }
        let n = norm(vector);
        if n == 0.0 {
            self.skipped_zero_norm += 1;
            return false;
        }
        self.index.insert(key.clone(), self.words.len());
        self.words.push(key);
        self.data.extend_from_slice(vector);
        self.norms.push(n);
        true
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index.get(word).map(|&i| self.row(i))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Cosine between two stored words. Uses the same arithmetic as
    /// [`cosine`], so results agree bit for bit.
    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let (&i, &j) = (self.index.get(a)?, self.index.get(b)?);
        Some(cosine_parts(self.row(i), self.row(j), self.norms[i], self.norms[j]))
    }

    /// Words other than `word` with cosine >= `threshold`, by descending
    /// similarity then lexicographically. Exhaustive scan.
    pub fn synonyms(&self, word: &str, threshold: f64) -> Result<Vec<(String, f64)>, EmbeddingError> {
        let &q = self
            .index
            .get(word)
            .ok_or_else(|| EmbeddingError::NotFound(word.to_string()))?;
        let qv = self.row(q);
        let mut out: Vec<(String, f64)> = (0..self.len())
            .filter(|&i| i != q)
            .filter_map(|i| {
                let s = cosine_parts(qv, self.row(i), self.norms[q], self.norms[i]);
                (s >= threshold).then(|| (self.words[i].clone(), s))
            })
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    /// Parses the whitespace-separated text format: `<token> <f1> ... <fD>`
    /// per line with an optional `<count> <dim>` header line.
    pub fn parse<R: BufRead>(reader: R, expected_dim: Option<usize>, label: &str) -> Result<Self, EmbeddingError> {
        let mut table: Option<EmbeddingTable> = None;
        let mut buf = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| EmbeddingError::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if i == 0 && fields.len() == 2 {
                if let (Ok(_), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    if expected_dim.is_some_and(|e| e != d) {
                        return Err(EmbeddingError::Parse {
                            line: lineno,
                            message: format!("header declares dimension {d}, expected {}", expected_dim.unwrap_or(0)),
                        });
                    }
                    table = Some(EmbeddingTable::new(d, label));
                    continue;
                }
            }
            let d = fields.len() - 1;
            let t = table.get_or_insert_with(|| EmbeddingTable::new(expected_dim.unwrap_or(d), label));
            if d != t.dim || d == 0 {
                return Err(EmbeddingError::Parse {
                    line: lineno,
                    message: format!("expected {} values, found {d}", t.dim),
                });
            }
            buf.clear();
            for f in &fields[1..] {
                let x: f32 = f.parse().map_err(|_| EmbeddingError::Parse {
                    line: lineno,
                    message: format!("non-numeric value {f:?}"),
                })?;
                if !x.is_finite() {
                    return Err(EmbeddingError::Parse {
                        line: lineno,
                        message: format!("non-finite value {f:?}"),
                    });
                }
                buf.push(x);
            }
            t.insert(fields[0], &buf);
        }
        if let Some(t) = &table {
            if t.skipped_zero_norm > 0 {
                log::warn!("skipped {} zero-norm vectors", t.skipped_zero_norm);
            }
        }
        Ok(table.unwrap_or_else(|| EmbeddingTable::new(expected_dim.unwrap_or(0), label)))
    }

    pub fn load(path: &Path, expected_dim: Option<usize>, label: &str) -> Result<Self, EmbeddingError> {
        let f = std::fs::File::open(path).map_err(|source| EmbeddingError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(std::io::BufReader::new(f), expected_dim, label)
    }

    /// Renders the table in the text format with a header line. Floats use
    /// the shortest representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.len(), self.dim);
        for (i, w) in self.words.iter().enumerate() {
            s.push_str(w);
            for x in self.row(i) {
                write!(s, " {x}").expect("write to string");
            }
            s.push('\n');
        }
        s
    }

    /// Keeps only stored words among the `max_size` most frequent corpus
    /// lemmas (frequency descending, ties lexicographic).
    pub fn cap_vocabulary(&self, frequencies: &HashMap<String, usize>, max_size: usize) -> EmbeddingTable {
        let mut ranked: Vec<(&String, &usize)> = frequencies.iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        let keep: std::collections::HashSet<&str> =
            ranked.into_iter().take(max_size).map(|(w, _)| w.as_str()).collect();
        let mut out = EmbeddingTable::new(self.dim, &self.label);
        for (i, w) in self.words.iter().enumerate() {
            if keep.contains(w.as_str()) {
                out.insert(w, self.row(i));
            }
        }
        out
    }
}

/// Builds a table where every word of a group lies within a small angle of
/// its group's random centre and all other words point in independent random
/// directions. `spread` is the per-coordinate noise relative to the centre's
/// per-coordinate scale; 0.15 keeps within-group cosines above 0.95 at
/// dimension 50.
pub fn synthetic_table(
    groups: &[Vec<String>],
    background: &[String],
    dim: usize,
    spread: f64,
    seed: u64,
    label: &str,
) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = move || -> f64 {
        // Box-Muller
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut vectors: BTreeMap<String, Vec<f32>> = BTreeMap::new();
    for g in groups {
        let centre: Vec<f64> = (0..dim).map(|_| gaussian()).collect();
        for w in g {
            let v = centre.iter().map(|c| (c + spread * gaussian()) as f32).collect();
            vectors.entry(w.clone()).or_insert(v);
        }
    }
    for w in background {
        if !vectors.contains_key(w) {
            let v = (0..dim).map(|_| gaussian() as f32).collect();
            vectors.insert(w.clone(), v);
        }
    }
    let mut t = EmbeddingTable::new(dim, label);
    for (w, v) in &vectors {
        t.insert(w, v);
    }
    t
}
