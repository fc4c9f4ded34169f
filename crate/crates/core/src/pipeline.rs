//! Glue between datasets, concept maps, features and models, shared by the
//! command-line tool and the experiment harness.

use std::collections::{BTreeMap, HashMap};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::boc::{build_concept_map, lemma_order, BocError, ConceptMap};
use crate::corpus::{Corpus, GeneratorConfig};
use crate::embeddings::{synthetic_table, EmbeddingTable};
use crate::eval::{CurvePoint, LearningCurve};
use crate::features::{featurize, fit_space, fit_tfidf, FeatureError, FeatureKind, FeatureSpace, Matrix, Resources, Row, TfIdfModel};
use crate::instancegen::{learning_curve_fractions, RelationDataset, RelationInstance, SplitTriple};
use crate::models::{grid_search, f1_on, Examples, GridPlan, TrainConfig, TrainError};
use crate::textproc::TextNormalizer;

pub const DEFAULT_VOCAB_CAP: usize = 20_000;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Concept(#[from] BocError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("{0}")]
    Data(String),
}

/// Content lemmas of every document, keyed by document id.
pub fn document_lemmas(corpus: &Corpus, normalizer: &TextNormalizer) -> BTreeMap<String, Vec<String>> {
    corpus
        .documents
        .iter()
        .map(|d| (d.id.clone(), normalizer.normalize_text(&d.text)))
        .collect()
}

/// Synthetic embeddings matching a generator config: the lemmas of each
/// synonym group cluster tightly, every other generator word points in its
/// own random direction.
pub fn generator_embeddings(
    cfg: &GeneratorConfig,
    normalizer: &TextNormalizer,
    dim: usize,
    seed: u64,
    label: &str,
) -> EmbeddingTable {
    let lemmas = |words: &[String]| -> Vec<String> {
        let mut out: Vec<String> = words.iter().flat_map(|w| normalizer.normalize_text(w)).collect();
        out.sort();
        out.dedup();
        out
    };
    let groups: Vec<Vec<String>> = cfg.synonym_groups().iter().map(|g| lemmas(g)).collect();
    synthetic_table(&groups, &lemmas(&cfg.background_words()), dim, 0.15, seed, label)
}

/// Looks up split members by id, in split order.
pub fn select<'a>(dataset: &'a RelationDataset, ids: &[String]) -> Result<Vec<&'a RelationInstance>, PipelineError> {
    let index: HashMap<&str, &RelationInstance> = dataset.instances.iter().map(|i| (i.id.as_str(), i)).collect();
    ids.iter()
        .map(|id| {
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| PipelineError::Data(format!("split refers to unknown instance {id}")))
        })
        .collect()
}

/// Hash of an id list, used to pin test sets.
pub fn ids_hash(ids: &[String]) -> String {
    let mut h = Sha256::new();
    for id in ids {
        h.update(id.as_bytes());
        h.update([b'\n']);
    }
    hex::encode(&h.finalize()[..16])
}

/// How to turn instances into features.
#[derive(Debug, Clone, Copy)]
pub struct FeatureJob<'a> {
    pub kind: FeatureKind,
    pub mu: f64,
    pub vocab_cap: usize,
    pub embeddings: Option<&'a EmbeddingTable>,
    pub doc_lemmas: &'a BTreeMap<String, Vec<String>>,
}

/// Everything fitted on one training set.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub space: FeatureSpace,
    pub concepts: Option<ConceptMap>,
    pub table: Option<EmbeddingTable>,
    pub tfidf: Option<TfIdfModel>,
}

impl FeatureJob<'_> {
    fn training_documents<'i>(&self, train: &[&'i RelationInstance]) -> Vec<&'i str> {
        let mut docs: Vec<&str> = train.iter().map(|i| i.document.as_str()).collect();
        docs.sort_unstable();
        docs.dedup();
        docs
    }

    /// Embedding table restricted to the `vocab_cap` most frequent lemmas of
    /// the training documents.
    pub fn capped_table(&self, train: &[&RelationInstance]) -> Option<EmbeddingTable> {
        let table = self.embeddings?;
        let mut freq: HashMap<String, usize> = HashMap::new();
        for d in self.training_documents(train) {
            for w in self.doc_lemmas.get(d).into_iter().flatten() {
                *freq.entry(w.clone()).or_insert(0) += 1;
            }
        }
        Some(table.cap_vocabulary(&freq, self.vocab_cap))
    }

    /// Builds the concept map from the training contexts.
    pub fn concept_map(&self, train: &[&RelationInstance], table: &EmbeddingTable) -> Result<ConceptMap, PipelineError> {
        let order = lemma_order(train.iter().map(|i| i.context.as_slice()));
        Ok(build_concept_map(&order, table, self.mu)?)
    }

    /// Fits concept map (unless given), TF-IDF and the feature space.
    pub fn fit(&self, train: &[&RelationInstance], concepts: Option<ConceptMap>, provenance: &str) -> Result<Fitted, PipelineError> {
        let needs_table = self.kind.uses_embeddings() || (self.kind.uses_concepts() && concepts.is_none());
        let table = if needs_table {
            Some(self.capped_table(train).ok_or_else(|| {
                FeatureError::Config(format!("{} features need an embedding table", self.kind))
            })?)
        } else {
            None
        };
        let concepts = match concepts {
            Some(m) => Some(m),
            None if self.kind.uses_concepts() => Some(self.concept_map(train, table.as_ref().expect("table built"))?),
            None => None,
        };
        let tfidf = if self.kind.uses_embeddings() {
            let docs = self.training_documents(train);
            let mut m = fit_tfidf(docs.iter().map(|d| (*d, self.doc_lemmas.get(*d).map_or(&[][..], Vec::as_slice))))?;
            for (id, lemmas) in self.doc_lemmas {
                m.register(id, lemmas);
            }
            Some(m)
        } else {
            None
        };
        let res = Resources {
            concepts: concepts.as_ref(),
            embeddings: table.as_ref(),
            tfidf: tfidf.as_ref(),
        };
        let space = fit_space(train.iter().map(|i| i.context.as_slice()), self.kind, &res, provenance)?;
        Ok(Fitted {
            space,
            concepts,
            table,
            tfidf,
        })
    }
}

impl Fitted {
    pub fn resources(&self) -> Resources<'_> {
        Resources {
            concepts: self.concepts.as_ref(),
            embeddings: self.table.as_ref(),
            tfidf: self.tfidf.as_ref(),
        }
    }

    pub fn matrix(&self, instances: &[&RelationInstance]) -> Result<Matrix, PipelineError> {
        let res = self.resources();
        let rows = instances
            .iter()
            .map(|i| {
                Ok(Row {
                    id: i.id.clone(),
                    label: i.label.is_positive(),
                    x: featurize(&i.context, &i.document, &self.space, &res)?,
                })
            })
            .collect::<Result<Vec<_>, FeatureError>>()?;
        Ok(Matrix {
            kind: self.space.kind,
            space_hash: self.space.hash(),
            dim: self.space.dim(),
            rows,
        })
    }
}

/// Learning-curve settings.
#[derive(Debug, Clone)]
pub struct CurveJob<'a> {
    pub kinds: Vec<FeatureKind>,
    pub features: FeatureJob<'a>,
    pub plan: GridPlan,
    pub train: TrainConfig,
    /// Seed of the permutation behind the nine nested subsets.
    pub seed: u64,
}

/// Trains on nested 10%..90% subsets of the split's training set and scores
/// each model on the split's test set. Concept map, TF-IDF and feature space
/// are refitted on every subset. Points whose subset holds one class only are
/// kept with an empty score.
pub fn run_learning_curve(dataset: &RelationDataset, split: &SplitTriple, job: &CurveJob) -> Result<LearningCurve, PipelineError> {
    let fractions = learning_curve_fractions(&split.train, job.seed);
    let dev = select(dataset, &split.dev)?;
    let test = select(dataset, &split.test)?;
    let test_hash = ids_hash(&split.test);
    let mut points = Vec::new();
    for &kind in &job.kinds {
        let fj = FeatureJob { kind, ..job.features };
        for (k, ids) in fractions.iter().enumerate() {
            let fraction = (k + 1) as f64 / 10.0;
            let train = select(dataset, ids)?;
            let mut point = CurvePoint {
                fraction,
                train_size: train.len(),
                feature_kind: kind.to_string(),
                f1: None,
                note: None,
            };
            let pos = train.iter().filter(|i| i.label.is_positive()).count();
            if pos == 0 || pos == train.len() {
                point.note = Some("training subset has one class only".into());
                points.push(point);
                continue;
            }
            let fitted = fj.fit(&train, None, &format!("{} split {} {:.0}%", dataset.relation, split.split, fraction * 100.0))?;
            let tr = Examples::from_matrix(&fitted.matrix(&train)?);
            let dv = Examples::from_matrix(&fitted.matrix(&dev)?);
            let te_matrix = fitted.matrix(&test)?;
            debug_assert_eq!(ids_hash(&te_matrix.rows.iter().map(|r| r.id.clone()).collect::<Vec<_>>()), test_hash);
            let te = Examples::from_matrix(&te_matrix);
            match grid_search(&job.plan, &tr, &dv, &job.train) {
                Ok((model, _, _)) => point.f1 = Some(f1_on(&model, &te)?),
                Err(e) => point.note = Some(e.to_string()),
            }
            points.push(point);
        }
    }
    Ok(LearningCurve {
        relation: dataset.relation.clone(),
        model: job.plan.points.first().map(|h| h.kind().to_string()).unwrap_or_default(),
        test_hash,
        points,
    })
}
