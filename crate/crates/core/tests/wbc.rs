use std::collections::BTreeSet;

use proptest::prelude::*;
use relex_core::corpus::{generate_synthetic_corpus, parse_standoff, Document, EntityType, GeneratorConfig, RelationSchema, Schema};
use relex_core::eval::{score, GoldKey};
use relex_core::textproc::{DocumentLayout, TextNormalizer};
use relex_core::wbc::{extract, extract_corpus, gold_keys, tune_rho};

fn schema() -> Schema {
    let ty = |n: &str, a: &str| EntityType { name: n.into(), abbreviation: a.into() };
    Schema {
        entity_types: vec![
            ty("ClinicalFinding", "CF"),
            ty("TestName", "TN"),
            ty("TimeDescriptor", "TD"),
            ty("EndocrineTherapy", "ET"),
        ],
        relations: vec![
            RelationSchema::new("TestToAssess", ["TestName"], ["ClinicalFinding"]),
            RelationSchema::new("TherapyTiming", ["TimeDescriptor"], ["EndocrineTherapy"]),
        ],
    }
}

/// Builds a document from text with `[Type surface]` brackets marking mentions
/// and `gold` listing (relation, left index, right index) over mentions.
fn doc(id: &str, marked: &str, gold: &[(&str, usize, usize)]) -> Document {
    let mut text = String::new();
    let mut ann = String::new();
    let mut rest = marked;
    let mut k = 0;
    while let Some(open) = rest.find('[') {
        text.push_str(&rest[..open]);
        let close = rest[open..].find(']').unwrap() + open;
        let (ty, surface) = rest[open + 1..close].split_once(' ').unwrap();
        let start = text.chars().count();
        text.push_str(surface);
        k += 1;
        ann.push_str(&format!("T{k}\t{ty} {start} {}\t{surface}\n", start + surface.chars().count()));
        rest = &rest[close + 1..];
    }
    text.push_str(rest);
    for (i, (rel, l, r)) in gold.iter().enumerate() {
        ann.push_str(&format!("R{}\t{rel} Arg1:T{} Arg2:T{}\n", i + 1, l + 1, r + 1));
    }
    parse_standoff(id, &text, &ann, &schema()).unwrap()
}

fn has(preds: &[relex_core::wbc::PredictedRelation], rel: &str) -> bool {
    preds.iter().any(|p| p.relation == rel)
}

#[test]
fn window_reaches_into_the_next_sentence() {
    // four tokens ("Then", "we", "ordered", "a") precede the test name
    let d = doc("d1", "She reported [ClinicalFinding fatigue]. Then we ordered a [TestName bone scan].", &[]);
    let layout = DocumentLayout::new(&d, &TextNormalizer::default());
    assert_eq!(layout.sentences.len(), 2);
    assert_eq!(layout.sentences[1].tokens_before(d.mentions[1].start), 4);
    assert!(has(&extract(&d, &schema(), 5), "TestToAssess"));
    assert!(!has(&extract(&d, &schema(), 0), "TestToAssess"));
    let p = &extract(&d, &schema(), 5)[0];
    assert_eq!((p.left.as_str(), p.right.as_str()), ("T2", "T1"));
}

#[test]
fn same_sentence_pair_at_rho_zero() {
    let d = doc("d1", "She [TimeDescriptor remains on] [EndocrineTherapy Arimidex] tablets.", &[]);
    let preds = extract(&d, &schema(), 0);
    assert_eq!(preds.len(), 1);
    assert_eq!(preds[0].relation, "TherapyTiming");
    assert_eq!((preds[0].left.as_str(), preds[0].right.as_str()), ("T1", "T2"));
}

#[test]
fn six_tokens_need_a_wider_window() {
    let d = doc(
        "d1",
        "She reported [ClinicalFinding fatigue]. After that we also ordered a [TestName bone scan].",
        &[],
    );
    assert!(!has(&extract(&d, &schema(), 5), "TestToAssess"));
    assert!(!has(&extract(&d, &schema(), 6), "TestToAssess"));
    assert!(has(&extract(&d, &schema(), 7), "TestToAssess"));
    assert!(has(&extract(&d, &schema(), 10), "TestToAssess"));
}

#[test]
fn window_never_spans_three_sentences_or_looks_back() {
    let d = doc(
        "d1",
        "A [TestName biopsy] was done. Nothing else. She reported [ClinicalFinding pain].",
        &[],
    );
    assert!(extract(&d, &schema(), 100).is_empty());
}

fn recall_per_relation(corpus: &[Document], rho: usize) -> std::collections::BTreeMap<String, f64> {
    let s = &generated(1, 1).schema;
    let pred: Vec<GoldKey> = extract_corpus(corpus, s, |_| rho).iter().map(|p| p.key()).collect();
    score(&pred, &gold_keys(corpus)).0.into_iter().map(|(r, c)| (r, c.recall())).collect()
}

fn generated(seed: u64, docs: usize) -> relex_core::corpus::Corpus {
    let cfg = GeneratorConfig { seed, documents: docs, ..GeneratorConfig::default() };
    generate_synthetic_corpus(&cfg).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn predictions_grow_with_rho(seed in 0u64..1000, a in 0usize..12, b in 0usize..12) {
        let corpus = generated(seed, 6);
        let (lo, hi) = (a.min(b), a.max(b));
        let small: BTreeSet<GoldKey> = extract_corpus(&corpus.documents, &corpus.schema, |_| lo).iter().map(|p| p.key()).collect();
        let large: BTreeSet<GoldKey> = extract_corpus(&corpus.documents, &corpus.schema, |_| hi).iter().map(|p| p.key()).collect();
        prop_assert!(small.is_subset(&large));
        let r0 = recall_per_relation(&corpus.documents, lo);
        let r1 = recall_per_relation(&corpus.documents, hi);
        for (rel, x) in &r0 {
            let y = r1.get(rel).copied().unwrap_or(0.0);
            prop_assert!(*x <= y, "{rel}: {x} > {y}");
        }
    }

    #[test]
    fn rho_zero_is_exactly_same_sentence_pairs(seed in 0u64..1000) {
        let corpus = generated(seed, 4);
        let normalizer = TextNormalizer::default();
        for d in &corpus.documents {
            let layout = DocumentLayout::new(d, &normalizer);
            let got: BTreeSet<GoldKey> = extract(d, &corpus.schema, 0).iter().map(|p| p.key()).collect();
            let mut want = BTreeSet::new();
            for rel in &corpus.schema.relations {
                for m1 in &d.mentions {
                    for m2 in &d.mentions {
                        if m1.id < m2.id
                            && rel.orient(&m1.entity_type, &m2.entity_type).is_some()
                            && layout.sentence_of(&m1.id) == layout.sentence_of(&m2.id)
                        {
                            want.insert((rel.name.clone(), relex_core::eval::rule_key(&d.id, &m1.id, &m2.id)));
                        }
                    }
                }
            }
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn extraction_is_pure(seed in 0u64..1000, rho in 0usize..12) {
        let corpus = generated(seed, 3);
        let a = extract_corpus(&corpus.documents, &corpus.schema, |_| rho);
        let b = extract_corpus(&corpus.documents, &corpus.schema, |_| rho);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn tuning_prefers_zero_on_intra_only_dev() {
    let mut cfg = GeneratorConfig { seed: 3, documents: 30, ..GeneratorConfig::default() };
    for r in &mut cfg.relations {
        r.intra_fraction = 1.0;
    }
    let corpus = generate_synthetic_corpus(&cfg).unwrap();
    for (rel, choice) in tune_rho(&corpus.documents, &corpus.schema, &[0, 5, 10]) {
        assert_eq!(choice.rho, 0, "{rel}: {:?}", choice.f1);
    }
}

#[test]
fn tuning_finds_the_window_covering_near_pairs() {
    // 2 of 5 gold pairs sit 3 tokens into the next sentence; 7-token pairs are
    // never gold, so rho=10 only adds false positives.
    let mut docs = Vec::new();
    for i in 0..3 {
        docs.push(doc(&format!("intra{i}"), "A [TestName biopsy] showed [ClinicalFinding a lump].", &[("TestToAssess", 0, 1)]));
    }
    for i in 0..2 {
        docs.push(doc(
            &format!("near{i}"),
            "She had [ClinicalFinding pain]. We then did [TestName a scan].",
            &[("TestToAssess", 1, 0)],
        ));
    }
    for i in 0..3 {
        docs.push(doc(&format!("far{i}"), "She had [ClinicalFinding pain]. Much later on we then also did [TestName a scan].", &[]));
    }
    let choice = &tune_rho(&docs, &schema(), &[10, 5, 0])["TestToAssess"];
    let f1: Vec<f64> = choice.f1.iter().map(|c| c.1).collect();
    // rho=0: P=3/3 R=3/5; rho=5: P=R=1; rho=10: P=5/8 R=1
    let oracle = |p: f64, r: f64| 2.0 * p * r / (p + r);
    assert_eq!(choice.f1.iter().map(|c| c.0).collect::<Vec<_>>(), vec![0, 5, 10]);
    assert!((f1[0] - oracle(1.0, 0.6)).abs() < 1e-12);
    assert!((f1[1] - 1.0).abs() < 1e-12);
    assert!((f1[2] - oracle(5.0 / 8.0, 1.0)).abs() < 1e-12);
    assert_eq!(choice.rho, 5);
}

#[test]
fn tuning_ties_go_to_the_smaller_window_and_missing_gold_warns() {
    let docs = vec![doc("d", "A [TestName biopsy] showed [ClinicalFinding a lump].", &[("TestToAssess", 0, 1)])];
    let out = tune_rho(&docs, &schema(), &[5, 10]);
    assert_eq!(out["TestToAssess"].rho, 5);
    assert!(out["TestToAssess"].warning.is_none());
    assert_eq!(out["TherapyTiming"].rho, 0);
    assert!(out["TherapyTiming"].warning.is_some());
}
