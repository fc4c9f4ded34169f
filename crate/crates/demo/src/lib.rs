//! Browser demo. Each exported function returns a JSON string; the plain
//! Rust versions below it are what the page and the tests call into.

use std::collections::BTreeMap;

use relex_core::boc::build_concept_map;
use relex_core::corpus::{generate_synthetic_corpus, GeneratorConfig};
use relex_core::eval::{micro_aggregate, score, Counts};
use relex_core::features::FeatureKind;
use relex_core::instancegen::{build_datasets, make_splits};
use relex_core::models::{GridPlan, Hyper, TrainConfig};
use relex_core::pipeline::{document_lemmas, generator_embeddings, run_learning_curve, CurveJob, FeatureJob, DEFAULT_VOCAB_CAP};
use relex_core::textproc::TextNormalizer;
use relex_core::wbc::{extract_corpus, gold_keys};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_DOCUMENTS: usize = 400;

fn counts_json(c: &Counts) -> Value {
    json!({"tp": c.tp, "fp": c.fp, "fn": c.fn_, "precision": c.precision(), "recall": c.recall(), "f1": c.f1()})
}

fn corpus_config(seed: u64, documents: usize) -> Result<GeneratorConfig, String> {
    if documents == 0 || documents > MAX_DOCUMENTS {
        return Err(format!("documents must be between 1 and {MAX_DOCUMENTS}"));
    }
    Ok(GeneratorConfig { seed, documents, ..GeneratorConfig::default() })
}

/// Window-bounded extraction on a generated corpus, scored against its gold
/// annotations. Also returns the first document with its predicted pairs.
pub fn run_wbc(seed: u64, documents: usize, rho: usize) -> Result<Value, String> {
    let corpus = generate_synthetic_corpus(&corpus_config(seed, documents)?).map_err(|e| e.to_string())?;
    let preds = extract_corpus(&corpus.documents, &corpus.schema, |_| rho);
    let keys: Vec<_> = preds.iter().map(|p| p.key()).collect();
    let (per_type, _) = score(&keys, &gold_keys(&corpus.documents));
    let overall = micro_aggregate(per_type.values());
    let relations: BTreeMap<&String, Value> = per_type.iter().map(|(r, c)| (r, counts_json(c))).collect();
    let sample = corpus.documents.first().map(|doc| {
        let surface = |id: &str| doc.mention(id).map(|m| m.surface.clone()).unwrap_or_default();
        let pairs: Vec<Value> = preds
            .iter()
            .filter(|p| p.document == doc.id)
            .map(|p| json!({"relation": p.relation, "left": surface(&p.left), "right": surface(&p.right), "window": [p.window.0, p.window.1]}))
            .collect();
        let gold: Vec<Value> = doc
            .relations
            .iter()
            .map(|r| json!({"relation": r.relation, "left": surface(&r.left), "right": surface(&r.right)}))
            .collect();
        json!({"id": doc.id, "text": doc.text, "predicted": pairs, "gold": gold})
    });
    Ok(json!({"rho": rho, "documents": documents, "overall": counts_json(&overall), "relations": relations, "sample": sample}))
}

/// Concept map over the synthetic embedding vocabulary at threshold `mu`,
/// largest concepts first.
pub fn run_concepts(seed: u64, mu: f64) -> Result<Value, String> {
    let cfg = GeneratorConfig::default();
    let table = generator_embeddings(&cfg, &TextNormalizer::default(), 50, seed, "synthetic");
    let mut order = table.words().to_vec();
    order.sort();
    let map = build_concept_map(&order, &table, mu).map_err(|e| e.to_string())?;
    let mut members = map.members();
    members.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    members.retain(|m| m.len() > 1);
    Ok(json!({
        "mu": mu,
        "vocabulary": order.len(),
        "concepts": map.concept_count(),
        "mapped": map.mapped_count(),
        "clusters": members,
    }))
}

/// BoW against BoC learning curve on the synonym-cluster corpus.
pub fn run_curve(seed: u64, documents: usize) -> Result<Value, String> {
    if documents < 20 || documents > MAX_DOCUMENTS {
        return Err(format!("documents must be between 20 and {MAX_DOCUMENTS}"));
    }
    let norm = TextNormalizer::default();
    let cfg = GeneratorConfig::synonym_cluster(seed, documents);
    let corpus = generate_synthetic_corpus(&cfg).map_err(|e| e.to_string())?;
    let table = generator_embeddings(&cfg, &norm, 50, seed, "synthetic");
    let docs = document_lemmas(&corpus, &norm);
    let (sets, _) = build_datasets(&corpus, &norm, 10);
    let ds = sets.first().ok_or("corpus has no usable relation")?;
    let split = make_splits(ds, [seed, seed + 1, seed + 2]).map_err(|e| e.to_string())?.remove(0);
    let job = CurveJob {
        kinds: vec![FeatureKind::Bow, FeatureKind::Boc],
        features: FeatureJob { kind: FeatureKind::Bow, mu: 0.9, vocab_cap: DEFAULT_VOCAB_CAP, embeddings: Some(&table), doc_lemmas: &docs },
        plan: GridPlan::single(Hyper::LinearSvm { c: 1.0 }),
        train: TrainConfig { seed, ..TrainConfig::default() },
        seed,
    };
    let curve = run_learning_curve(ds, &split, &job).map_err(|e| e.to_string())?;
    serde_json::to_value(&curve).map_err(|e| e.to_string())
}

fn respond(result: Result<Value, String>) -> Result<String, JsValue> {
    result.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn wbc_demo(seed: u32, documents: u32, rho: u32) -> Result<String, JsValue> {
    respond(run_wbc(seed.into(), documents as usize, rho as usize))
}

#[wasm_bindgen]
pub fn concept_demo(seed: u32, mu: f64) -> Result<String, JsValue> {
    respond(run_concepts(seed.into(), mu))
}

#[wasm_bindgen]
pub fn curve_demo(seed: u32, documents: u32) -> Result<String, JsValue> {
    respond(run_curve(seed.into(), documents as usize))
}
