use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use relex_core::boc::{concept_stats, ConceptMap};
use relex_core::corpus::{generate_synthetic_corpus, load_corpus, write_corpus, GeneratorConfig, Schema};
use relex_core::embeddings::EmbeddingTable;
use relex_core::eval::{average_over_splits, render_tsv, score, Counts, EvalReport, Fingerprint, GoldKey, KeyMode, LearningCurve as Curve};
use relex_core::features::{FeatureKind, FeatureSpace, Matrix};
use relex_core::instancegen::{build_datasets, make_splits, Provenance, RelationDataset, SplitFile, SplitTriple};
use relex_core::models::{
    cross_validate, grid_search, Examples, GridPlan, Hyper, ModelFile, ModelKind, TrainConfig, MODEL_VERSION,
};
use relex_core::pipeline::{document_lemmas, generator_embeddings, run_learning_curve, select, CurveJob, FeatureJob};
use relex_core::textproc::{Lemmatizer, Stopwords, TextNormalizer};
use relex_core::wbc::{extract_corpus, gold_keys, read_predictions, tune_rho, write_predictions};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::error::{integrity, usage, CliError, Result};

const MANIFEST: &str = "manifest.json";
const DOCUMENTS: &str = "documents.jsonl";
const FEATURES_META: &str = "meta.json";

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    integrity(format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &(serde_json::to_string_pretty(value).expect("output serializes") + "\n"))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let raw = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&raw).map_err(|e| integrity(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn file_label(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("embeddings").to_string()
}

pub fn gen_corpus(a: &GenCorpus) -> Result<()> {
    let mut cfg = match &a.common.config {
        Some(p) => {
            let raw = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            GeneratorConfig::from_toml(&raw)?
        }
        None => GeneratorConfig::default(),
    };
    if let Some(s) = a.common.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.documents {
        cfg.documents = n;
    }
    let corpus = generate_synthetic_corpus(&cfg)?;
    write_corpus(&a.common.out, &corpus)?;
    write_text(&a.common.out.join("generator.toml"), &cfg.to_toml())?;
    log::info!("{} documents, {} relations", corpus.documents.len(), corpus.relation_count());
    if let Some(path) = &a.embeddings {
        if path.extension().is_some_and(|x| x == "txt") && path.parent() == Some(a.common.out.as_path()) {
            return Err(usage("embeddings inside the corpus directory must not end in .txt"));
        }
        let table = generator_embeddings(&cfg, &TextNormalizer::default(), a.embedding_dim, cfg.seed, &file_label(path));
        write_text(path, &table.to_text())?;
    }
    println!("corpus: {} ({} documents)", corpus.fingerprint(), corpus.documents.len());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRelation {
    relation: String,
    instances: usize,
    positives: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    provenance: Provenance,
    seeds: [u64; 3],
    min_count: usize,
    stopwords: String,
    relations: Vec<ManifestRelation>,
}

#[derive(Serialize, Deserialize)]
struct DocLemmas {
    id: String,
    lemmas: Vec<String>,
}

fn normalizer(t: &Text) -> Result<TextNormalizer> {
    let stopwords = match &t.stopwords {
        Some(p) => Stopwords::from_path(p).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => Stopwords::default(),
    };
    let lemmatizer = match &t.lemma_exceptions {
        Some(p) => Lemmatizer::from_path(p).map_err(usage)?,
        None => Lemmatizer::default(),
    };
    Ok(TextNormalizer::new(stopwords, lemmatizer))
}

fn check_relation_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
        return Err(integrity(format!("relation name {name:?} cannot be used as a file name")));
    }
    Ok(())
}

pub fn prepare(a: &Prepare) -> Result<()> {
    let norm = normalizer(&a.text)?;
    let corpus = load_corpus(&a.input)?;
    let (datasets, diagnostics) = build_datasets(&corpus, &norm, a.min_count);
    let s = a.common.seed.unwrap_or(1);
    let seeds = [s, s.wrapping_add(1), s.wrapping_add(2)];
    let out = &a.common.out;
    create_dir(out)?;
    let mut relations = Vec::new();
    for ds in &datasets {
        check_relation_name(&ds.relation)?;
        let splits = match make_splits(ds, seeds) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("skipping {e}");
                continue;
            }
        };
        ds.write_jsonl(&out.join(format!("{}.jsonl", ds.relation)))?;
        SplitFile {
            relation: ds.relation.clone(),
            splits,
        }
        .write(&out.join(format!("{}.splits.json", ds.relation)))?;
        relations.push(ManifestRelation {
            relation: ds.relation.clone(),
            instances: ds.instances.len(),
            positives: ds.positives(),
        });
        println!("{}: {} instances, {} positive", ds.relation, ds.instances.len(), ds.positives());
    }
    if relations.is_empty() {
        return Err(integrity(format!("no relation type has at least {} annotations", a.min_count)));
    }
    let mut docs = String::new();
    for (id, lemmas) in document_lemmas(&corpus, &norm) {
        docs.push_str(&serde_json::to_string(&DocLemmas { id, lemmas }).expect("lemmas serialize"));
        docs.push('\n');
    }
    write_text(&out.join(DOCUMENTS), &docs)?;
    write_json(&out.join("diagnostics.json"), &diagnostics)?;
    let manifest = Manifest {
        provenance: datasets[0].provenance.clone(),
        seeds,
        min_count: a.min_count,
        stopwords: a.text.stopwords.as_deref().map_or_else(|| "snowball-en".to_string(), file_label),
        relations,
    };
    write_json(&out.join(MANIFEST), &manifest)
}

struct Loaded {
    dataset: RelationDataset,
    split: SplitTriple,
    doc_lemmas: BTreeMap<String, Vec<String>>,
}

fn load_split(s: &Split) -> Result<Loaded> {
    check_relation_name(&s.relation)?;
    let manifest: Manifest = read_json(&s.prepared.join(MANIFEST))?;
    if !manifest.relations.iter().any(|r| r.relation == s.relation) {
        let known: Vec<&str> = manifest.relations.iter().map(|r| r.relation.as_str()).collect();
        return Err(usage(format!("unknown relation {} (prepared: {})", s.relation, known.join(", "))));
    }
    let dataset = RelationDataset::read_jsonl(
        &s.relation,
        manifest.provenance.clone(),
        &s.prepared.join(format!("{}.jsonl", s.relation)),
    )?;
    let file = SplitFile::read(&s.prepared.join(format!("{}.splits.json", s.relation)))?;
    if file.relation != s.relation {
        return Err(integrity(format!("split file belongs to {}", file.relation)));
    }
    let split = file
        .splits
        .into_iter()
        .find(|t| t.split == s.split)
        .ok_or_else(|| usage(format!("no split {} for {}", s.split, s.relation)))?;
    let path = s.prepared.join(DOCUMENTS);
    let f = fs::File::open(&path).map_err(|e| io_err(&path, e))?;
    let mut doc_lemmas = BTreeMap::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| io_err(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let d: DocLemmas = serde_json::from_str(&line).map_err(|e| integrity(format!("{}:{}: {e}", path.display(), n + 1)))?;
        doc_lemmas.insert(d.id, d.lemmas);
    }
    Ok(Loaded {
        dataset,
        split,
        doc_lemmas,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct WbcMeta {
    rho: String,
    candidates: Vec<usize>,
    chosen: BTreeMap<String, usize>,
}

fn wbc_meta_path(pred: &Path) -> PathBuf {
    let mut name = pred.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    pred.with_file_name(name)
}

pub fn wbc_extract(a: &WbcExtract) -> Result<()> {
    let fixed: Option<usize> = match a.rho.as_str() {
        "tuned" => None,
        s => Some(s.parse().map_err(|_| usage(format!("--rho must be a number or `tuned`, got {s}")))?),
    };
    let corpus = load_corpus(&a.input)?;
    let schema = match &a.schema {
        Some(p) => Schema::load(p)?,
        None => corpus.schema.clone(),
    };
    let chosen: BTreeMap<String, usize> = if let Some(rho) = fixed {
        schema.relations.iter().map(|r| (r.name.clone(), rho)).collect()
    } else {
        let dev_dir = a.dev.as_ref().ok_or_else(|| usage("--rho tuned needs --dev"))?;
        if a.candidates.is_empty() {
            return Err(usage("--candidates is empty"));
        }
        let dev = load_corpus(dev_dir)?;
        tune_rho(&dev.documents, &schema, &a.candidates)
            .into_iter()
            .map(|(rel, c)| {
                println!("{rel}: rho={} {:?}", c.rho, c.f1);
                (rel, c.rho)
            })
            .collect()
    };
    let preds = extract_corpus(&corpus.documents, &schema, |rel| chosen.get(rel).copied().unwrap_or(0));
    write_predictions(&a.common.out, &preds).map_err(|e| io_err(&a.common.out, e))?;
    let meta = WbcMeta {
        rho: a.rho.clone(),
        candidates: if fixed.is_none() { a.candidates.clone() } else { Vec::new() },
        chosen,
    };
    write_json(&wbc_meta_path(&a.common.out), &meta)?;
    println!("{} predictions", preds.len());
    Ok(())
}

fn load_table(e: &Embeddings) -> Result<Option<EmbeddingTable>> {
    match &e.embeddings {
        Some(p) => {
            let label = e.embeddings_label.clone().unwrap_or_else(|| file_label(p));
            Ok(Some(EmbeddingTable::load(p, None, &label)?))
        }
        None => Ok(None),
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(usage(format!("--mu must lie in (0, 1], got {mu}")));
    }
    Ok(())
}

pub fn build_concepts(a: &BuildConcepts) -> Result<()> {
    check_mu(a.embeddings.mu)?;
    let l = load_split(&a.split)?;
    let table = load_table(&a.embeddings)?.ok_or_else(|| usage("build-concepts needs --embeddings"))?;
    let job = FeatureJob {
        kind: FeatureKind::Boc,
        mu: a.embeddings.mu,
        vocab_cap: a.embeddings.vocab_cap,
        embeddings: Some(&table),
        doc_lemmas: &l.doc_lemmas,
    };
    let train = select(&l.dataset, &l.split.train)?;
    let capped = job.capped_table(&train).expect("table given");
    let map = job.concept_map(&train, &capped)?;
    let stats = concept_stats(&map);
    println!("{} concepts over {} lemmas", stats.concepts, stats.mapped_lemmas);
    write_text(&a.common.out, &(map.to_json() + "\n"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeaturesMeta {
    pub relation: String,
    pub split: u8,
    pub split_seed: u64,
    pub kind: String,
    pub mu: Option<f64>,
    pub embedding: Option<String>,
    pub vocab_cap: usize,
    pub space_hash: String,
    pub rows: [usize; 3],
}

pub fn featurize(a: &Featurize) -> Result<()> {
    let kind: FeatureKind = a.kind.parse()?;
    check_mu(a.embeddings.mu)?;
    let l = load_split(&a.split)?;
    let table = load_table(&a.embeddings)?;
    let concepts = match &a.concepts {
        Some(p) => {
            let raw = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            Some(ConceptMap::from_json(&raw)?)
        }
        None => None,
    };
    let job = FeatureJob {
        kind,
        mu: concepts.as_ref().map_or(a.embeddings.mu, |m| m.mu),
        vocab_cap: a.embeddings.vocab_cap,
        embeddings: table.as_ref(),
        doc_lemmas: &l.doc_lemmas,
    };
    let train = select(&l.dataset, &l.split.train)?;
    let dev = select(&l.dataset, &l.split.dev)?;
    let test = select(&l.dataset, &l.split.test)?;
    let fitted = job.fit(&train, concepts, &format!("{} split {} train", l.dataset.relation, l.split.split))?;
    let out = &a.common.out;
    create_dir(out)?;
    let mut rows = [0; 3];
    for (k, (part, set)) in [(Part::Train, &train), (Part::Dev, &dev), (Part::Test, &test)].into_iter().enumerate() {
        let m = fitted.matrix(set)?;
        rows[k] = m.rows.len();
        m.write(&out.join(part.file()))?;
    }
    write_text(&out.join("space.json"), &(fitted.space.to_json() + "\n"))?;
    if let Some(map) = &fitted.concepts {
        write_text(&out.join("concepts.json"), &(map.to_json() + "\n"))?;
    }
    let meta = FeaturesMeta {
        relation: l.dataset.relation.clone(),
        split: l.split.split,
        split_seed: l.split.seed,
        kind: kind.to_string(),
        mu: fitted.concepts.as_ref().map(|m| m.mu),
        embedding: fitted.space.embedding_label.clone().or_else(|| fitted.concepts.as_ref().map(|m| m.embedding_label.clone())),
        vocab_cap: a.embeddings.vocab_cap,
        space_hash: fitted.space.hash(),
        rows,
    };
    write_json(&out.join(FEATURES_META), &meta)?;
    println!("{} columns, space {}", fitted.space.dim(), meta.space_hash);
    Ok(())
}

fn read_features(dir: &Path) -> Result<FeaturesMeta> {
    let meta: FeaturesMeta = read_json(&dir.join(FEATURES_META))?;
    let raw = fs::read_to_string(dir.join("space.json")).map_err(|e| io_err(&dir.join("space.json"), e))?;
    let space = FeatureSpace::from_json(&raw)?;
    if space.hash() != meta.space_hash {
        return Err(integrity(format!("{}: feature space does not match meta.json", dir.display())));
    }
    Ok(meta)
}

fn read_matrix(dir: &Path, part: Part, meta: &FeaturesMeta) -> Result<Matrix> {
    let m = Matrix::read(&dir.join(part.file()))?;
    if m.space_hash != meta.space_hash {
        return Err(integrity(format!("{}: space hash {} differs from {}", part.file(), m.space_hash, meta.space_hash)));
    }
    Ok(m)
}

/// Grid from the model's default grid with any listed values replacing the
/// defaults of that hyperparameter.
fn plan(g: &Grid, dim: Option<usize>) -> Result<GridPlan> {
    let kind: ModelKind = g.model.parse()?;
    let defaults = GridPlan::default_for(kind, dim.unwrap_or(1));
    let pick = |given: &[f64], f: &dyn Fn(&Hyper) -> Option<f64>| -> Vec<f64> {
        if !given.is_empty() {
            return given.to_vec();
        }
        let mut v: Vec<f64> = Vec::new();
        for h in &defaults.points {
            if let Some(x) = f(h) {
                if !v.contains(&x) {
                    v.push(x);
                }
            }
        }
        v
    };
    let points = match kind {
        ModelKind::Logistic => pick(&g.lambda, &|h| match h {
            Hyper::Logistic { lambda } => Some(*lambda),
            _ => None,
        })
        .into_iter()
        .map(|lambda| Hyper::Logistic { lambda })
        .collect(),
        ModelKind::LinearSvm => pick(&g.c, &|h| match h {
            Hyper::LinearSvm { c } => Some(*c),
            _ => None,
        })
        .into_iter()
        .map(|c| Hyper::LinearSvm { c })
        .collect(),
        ModelKind::RbfSvm => {
            if dim.is_none() && g.gamma.is_empty() {
                return Err(usage("svm-rbf here needs explicit --gamma values"));
            }
            let cs = pick(&g.c, &|h| match h {
                Hyper::RbfSvm { c, .. } => Some(*c),
                _ => None,
            });
            let gammas = pick(&g.gamma, &|h| match h {
                Hyper::RbfSvm { gamma, .. } => Some(*gamma),
                _ => None,
            });
            cs.iter()
                .flat_map(|&c| gammas.iter().map(move |&gamma| Hyper::RbfSvm { c, gamma }))
                .collect()
        }
        ModelKind::Fnn => {
            let rates = pick(&g.learning_rate, &|h| match h {
                Hyper::Fnn { learning_rate, .. } => Some(*learning_rate),
                _ => None,
            });
            let epochs: Vec<usize> = if g.epochs.is_empty() {
                let mut v = Vec::new();
                for h in &defaults.points {
                    if let Hyper::Fnn { epochs, .. } = h {
                        if !v.contains(epochs) {
                            v.push(*epochs);
                        }
                    }
                }
                v
            } else {
                g.epochs.clone()
            };
            rates
                .iter()
                .flat_map(|&learning_rate| epochs.iter().map(move |&epochs| Hyper::Fnn { learning_rate, epochs }))
                .collect()
        }
    };
    Ok(GridPlan { points })
}

fn train_config(g: &Grid, seed: Option<u64>) -> Result<TrainConfig> {
    if g.batch_size == 0 {
        return Err(usage("--batch-size must be positive"));
    }
    Ok(TrainConfig {
        seed: seed.unwrap_or(0),
        balanced: g.balanced,
        batch_size: g.batch_size,
    })
}

pub fn train(a: &Train) -> Result<()> {
    let meta = read_features(&a.features)?;
    let tr = read_matrix(&a.features, Part::Train, &meta)?;
    let plan = plan(&a.grid, Some(tr.dim))?;
    let cfg = train_config(&a.grid, a.common.seed)?;
    let train_set = Examples::from_matrix(&tr);
    let (model, hyper, trace) = match a.cv {
        Some(k) if k < 2 => return Err(usage("--cv needs at least 2 folds")),
        Some(k) => cross_validate(&plan, &train_set, k, &cfg)?,
        None => {
            let dev = Examples::from_matrix(&read_matrix(&a.features, Part::Dev, &meta)?);
            grid_search(&plan, &train_set, &dev, &cfg)?
        }
    };
    let file = ModelFile {
        version: MODEL_VERSION,
        relation: meta.relation.clone(),
        feature_kind: meta.kind.clone(),
        space_hash: meta.space_hash.clone(),
        seed: cfg.seed,
        hyper,
        model,
        trace: Some(trace),
    };
    write_text(&a.common.out, &(file.to_json() + "\n"))?;
    println!("{} {} selected {hyper}", meta.relation, hyper.kind());
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub label: bool,
    pub score: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionFile {
    pub relation: String,
    pub split: u8,
    pub part: String,
    pub model: String,
    pub feature_kind: String,
    pub mu: Option<f64>,
    pub embedding: Option<String>,
    pub space_hash: String,
    pub seed: u64,
    pub predictions: Vec<Prediction>,
}

pub fn predict(a: &Predict) -> Result<()> {
    let model = ModelFile::read(&a.model)?;
    let meta = read_features(&a.features)?;
    if model.space_hash != meta.space_hash {
        return Err(integrity(format!(
            "model was trained on feature space {}, features use {}",
            model.space_hash, meta.space_hash
        )));
    }
    let m = read_matrix(&a.features, a.part, &meta)?;
    let predictions = m
        .rows
        .iter()
        .map(|r| {
            let (label, score) = model.model.predict(&r.x)?;
            Ok(Prediction {
                id: r.id.clone(),
                label,
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let out = PredictionFile {
        relation: meta.relation.clone(),
        split: meta.split,
        part: serde_json::to_value(a.part).expect("part").as_str().unwrap_or_default().to_string(),
        model: model.hyper.kind().to_string(),
        feature_kind: meta.kind.clone(),
        mu: meta.mu,
        embedding: meta.embedding.clone(),
        space_hash: meta.space_hash.clone(),
        seed: model.seed,
        predictions,
    };
    let positives = out.predictions.iter().filter(|p| p.label).count();
    write_json(&a.common.out, &out)?;
    println!("{} of {} predicted positive", positives, out.predictions.len());
    Ok(())
}

fn rule_counts(a: &Evaluate) -> Result<(Fingerprint, BTreeMap<String, Counts>)> {
    let gold_dir = a.gold.as_ref().ok_or_else(|| usage("rule mode needs --gold"))?;
    let corpus = load_corpus(gold_dir)?;
    let docs: BTreeSet<&str> = corpus.documents.iter().map(|d| d.id.as_str()).collect();
    let mut preds: Vec<GoldKey> = Vec::new();
    let mut label: Option<String> = None;
    for p in &a.pred {
        let rows = read_predictions(p).map_err(integrity)?;
        if let Some(r) = rows.iter().find(|r| !docs.contains(r.document.as_str())) {
            return Err(integrity(format!("{}: document {} is not in the gold corpus", p.display(), r.document)));
        }
        let this = match read_json::<WbcMeta>(&wbc_meta_path(p)) {
            Ok(m) => m.rho,
            Err(_) => {
                let rhos: BTreeSet<usize> = rows.iter().map(|r| r.rho).collect();
                match rhos.len() {
                    1 => rhos.iter().next().expect("one").to_string(),
                    _ => "mixed".into(),
                }
            }
        };
        if label.as_ref().is_some_and(|l| *l != this) {
            return Err(usage("prediction files use different windows"));
        }
        label = Some(this);
        preds.extend(rows.iter().map(|r| r.key()));
    }
    let gold = gold_keys(&corpus.documents);
    let (counts, dups) = score(&preds, &gold);
    if dups > 0 {
        log::warn!("{dups} duplicate prediction keys ignored");
    }
    Ok((Fingerprint::rule(label.as_deref().unwrap_or("?")), counts))
}

fn instance_counts(a: &Evaluate) -> Result<(Fingerprint, BTreeMap<String, Counts>)> {
    let prepared = a.prepared.as_ref().ok_or_else(|| usage("instance mode needs --prepared"))?;
    let mut fingerprint: Option<Fingerprint> = None;
    let mut counts = BTreeMap::new();
    for p in &a.pred {
        let f: PredictionFile = read_json(p)?;
        let fp = Fingerprint {
            method: "classifier".into(),
            mode: KeyMode::Instance,
            rho: None,
            feature_kind: Some(f.feature_kind.clone()),
            mu: f.mu,
            embedding: f.embedding.clone(),
            model: Some(f.model.clone()),
        };
        if fingerprint.as_ref().is_some_and(|x| *x != fp) {
            return Err(integrity(format!("{}: configuration differs from the other prediction files", p.display())));
        }
        fingerprint = Some(fp);
        if f.split != a.split {
            return Err(integrity(format!("{}: predictions are for split {}, not {}", p.display(), f.split, a.split)));
        }
        if counts.contains_key(&f.relation) {
            return Err(usage(format!("two prediction files for {}", f.relation)));
        }
        let l = load_split(&Split {
            prepared: prepared.clone(),
            relation: f.relation.clone(),
            split: a.split,
        })?;
        let ids = match a.part {
            Part::Train => &l.split.train,
            Part::Dev => &l.split.dev,
            Part::Test => &l.split.test,
        };
        let expected: BTreeSet<&str> = ids.iter().map(String::as_str).collect();
        let got: BTreeSet<&str> = f.predictions.iter().map(|p| p.id.as_str()).collect();
        if expected != got {
            return Err(integrity(format!(
                "{}: predicted ids differ from the {} ids of split {}",
                p.display(),
                f.part,
                a.split
            )));
        }
        let gold: Vec<GoldKey> = select(&l.dataset, ids)?
            .iter()
            .filter(|i| i.label.is_positive())
            .map(|i| (f.relation.clone(), i.id.clone()))
            .collect();
        let pred: Vec<GoldKey> = f.predictions.iter().filter(|p| p.label).map(|p| (f.relation.clone(), p.id.clone())).collect();
        let (c, _) = score(&pred, &gold);
        counts.insert(f.relation.clone(), c.get(&f.relation).copied().unwrap_or_default());
    }
    Ok((fingerprint.expect("at least one prediction file"), counts))
}

pub fn evaluate(a: &Evaluate) -> Result<()> {
    let (fp, counts) = match a.mode {
        Mode::Rule => rule_counts(a)?,
        Mode::Instance => instance_counts(a)?,
    };
    let report = EvalReport::from_counts(fp, a.split, &counts);
    write_text(&a.common.out, &(report.to_json() + "\n"))?;
    let o = &report.overall.scores;
    println!("overall P={:.3} R={:.3} F1={:.3}", o.precision, o.recall, o.f1);
    Ok(())
}

#[derive(Debug, Serialize)]
struct CurveFile<'a> {
    split: u8,
    split_seed: u64,
    seed: u64,
    mu: f64,
    embedding: Option<String>,
    curve: &'a Curve,
}

pub fn learning_curve(a: &LearningCurve) -> Result<()> {
    check_mu(a.embeddings.mu)?;
    let kinds = a.kinds.iter().map(|k| k.parse::<FeatureKind>()).collect::<std::result::Result<Vec<_>, _>>()?;
    let l = load_split(&a.split)?;
    let table = load_table(&a.embeddings)?;
    let seed = a.common.seed.unwrap_or(0);
    let job = CurveJob {
        kinds,
        features: FeatureJob {
            kind: FeatureKind::Bow,
            mu: a.embeddings.mu,
            vocab_cap: a.embeddings.vocab_cap,
            embeddings: table.as_ref(),
            doc_lemmas: &l.doc_lemmas,
        },
        plan: plan(&a.grid, None)?,
        train: train_config(&a.grid, Some(seed))?,
        seed,
    };
    let curve = run_learning_curve(&l.dataset, &l.split, &job)?;
    let out = &a.common.out;
    create_dir(out)?;
    write_text(&out.join("curve.csv"), &curve.to_csv())?;
    write_json(
        &out.join("curve.json"),
        &CurveFile {
            split: l.split.split,
            split_seed: l.split.seed,
            seed,
            mu: a.embeddings.mu,
            embedding: table.as_ref().map(|t| t.label.clone()),
            curve: &curve,
        },
    )?;
    for p in &curve.points {
        let f1 = p.f1.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        println!("{:.0}%\t{}\t{}\t{f1}", p.fraction * 100.0, p.train_size, p.feature_kind);
    }
    Ok(())
}

pub fn report(a: &Report) -> Result<()> {
    let mut groups: Vec<(Fingerprint, Vec<EvalReport>)> = Vec::new();
    for p in &a.input {
        let r: EvalReport = read_json(p)?;
        match groups.iter_mut().find(|(fp, _)| *fp == r.fingerprint) {
            Some((_, rs)) => {
                if rs.iter().any(|x| x.splits.iter().any(|s| r.splits.contains(s))) {
                    return Err(integrity(format!("{}: split {:?} given twice for one configuration", p.display(), r.splits)));
                }
                rs.push(r)
            }
            None => groups.push((r.fingerprint.clone(), vec![r])),
        }
    }
    let modes: BTreeSet<String> = groups.iter().map(|(fp, _)| format!("{:?}", fp.mode)).collect();
    if modes.len() > 1 {
        return Err(usage("rule-mode and instance-mode reports cannot share one table"));
    }
    let mut columns: Vec<(String, EvalReport)> = Vec::new();
    for (fp, rs) in &groups {
        let avg = average_over_splits(rs)?;
        let mut label = fp.label();
        if columns.iter().any(|(l, _)| *l == label) {
            label = format!("{label} {}", fp.embedding.as_deref().unwrap_or("-"));
        }
        if columns.iter().any(|(l, _)| *l == label) {
            label = format!("{label} #{}", columns.len() + 1);
        }
        columns.push((label, avg));
    }
    let out = &a.common.out;
    create_dir(out)?;
    let tsv = render_tsv(&columns);
    write_text(&out.join("report.tsv"), &tsv)?;
    let reports: Vec<&EvalReport> = columns.iter().map(|(_, r)| r).collect();
    write_json(&out.join("report.json"), &reports)?;
    print!("{tsv}");
    let _ = std::io::stdout().flush();
    Ok(())
}
