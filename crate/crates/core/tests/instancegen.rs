use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use relex_core::corpus::{
    generate_synthetic_corpus, parse_standoff, Corpus, EntityType, GeneratorConfig, RelationSchema, Schema,
};
use relex_core::instancegen::*;
use relex_core::textproc::{DocumentLayout, TextNormalizer};

fn schema() -> Schema {
    let ty = |n: &str, a: &str| EntityType { name: n.into(), abbreviation: a.into() };
    Schema {
        entity_types: vec![
            ty("TimeDescriptor", "TD"),
            ty("Therapy", "TP"),
            ty("TestName", "TN"),
            ty("TestResult", "TR"),
            ty("Intervention", "IV"),
        ],
        relations: vec![
            RelationSchema::new("TherapyTiming", ["TimeDescriptor"], ["Therapy"]),
            RelationSchema::new("TestFinding", ["TestName"], ["TestResult"]),
            RelationSchema::new("Intervention", ["Intervention"], ["Therapy"]),
        ],
    }
}

fn corpus(docs: &[(&str, &str)]) -> Corpus {
    let s = schema();
    let documents = docs
        .iter()
        .enumerate()
        .map(|(i, (text, ann))| parse_standoff(&format!("d{i:02}"), text, ann, &s).unwrap())
        .collect();
    Corpus::new(s, documents).unwrap()
}

#[test]
fn one_annotated_pair_gives_one_positive() {
    let c = corpus(&[(
        "She remains on tamoxifen.",
        "T1\tTimeDescriptor 4 14\tremains on\nT2\tTherapy 15 24\ttamoxifen\nR1\tTherapyTiming Arg1:T1 Arg2:T2\n",
    )]);
    let (sets, diag) = build_datasets(&c, &TextNormalizer::default(), 1);
    let tt = sets.iter().find(|d| d.relation == "TherapyTiming").unwrap();
    assert_eq!(tt.instances.len(), 1);
    assert_eq!(tt.positives(), 1);
    let i = &tt.instances[0];
    assert_eq!(i.context, vec!["TimeDescriptor", "Therapy"]);
    assert_eq!(i.id, "TherapyTiming:d00:T1:T2");
    assert!(!i.cross_sentence);
    assert_eq!(diag.relations["TherapyTiming"].negatives, 0);
}

#[test]
fn unannotated_compatible_pair_is_a_negative() {
    let text = "The mammogram was normal and stable.";
    let ann = "T1\tTestName 4 13\tmammogram\nT2\tTestResult 18 24\tnormal\nT3\tTestResult 29 35\tstable\nR1\tTestFinding Arg1:T1 Arg2:T2\n";
    assert_eq!(&text[4..13], "mammogram");
    assert_eq!(&text[29..35], "stable");
    let c = corpus(&[(text, ann)]);
    let (sets, _) = build_datasets(&c, &TextNormalizer::default(), 1);
    let tf = sets.iter().find(|d| d.relation == "TestFinding").unwrap();
    let labels: Vec<(String, Label)> = tf.instances.iter().map(|i| (i.right.clone(), i.label)).collect();
    assert_eq!(labels, vec![("T2".into(), Label::Positive), ("T3".into(), Label::Negative)]);
}

#[test]
fn rare_relations_are_dropped() {
    let mut docs = Vec::new();
    for _ in 0..5 {
        docs.push((
            "Surgery preceded tamoxifen.",
            "T1\tIntervention 0 7\tSurgery\nT2\tTherapy 17 26\ttamoxifen\nR1\tIntervention Arg1:T1 Arg2:T2\n",
        ));
    }
    let c = corpus(&docs);
    let (sets, diag) = build_datasets(&c, &TextNormalizer::default(), DEFAULT_MIN_COUNT);
    assert!(sets.iter().all(|d| d.relation != "Intervention"));
    assert_eq!(diag.dropped, vec!["Intervention".to_string()]);
    assert_eq!(diag.relations["Intervention"].annotations, 5);
}

#[test]
fn far_apart_gold_is_excluded_and_counted() {
    let text = "She is on tamoxifen. Nothing else. Since 2011 at least.";
    let ann = "T1\tTherapy 10 19\ttamoxifen\nT2\tTimeDescriptor 35 45\tSince 2011\nR1\tTherapyTiming Arg1:T2 Arg2:T1\n";
    let c = corpus(&[(text, ann)]);
    let (sets, diag) = build_datasets(&c, &TextNormalizer::default(), 1);
    assert!(sets.iter().find(|d| d.relation == "TherapyTiming").unwrap().instances.is_empty());
    assert_eq!(diag.relations["TherapyTiming"].excluded_far_apart, 1);
}

fn generated(seed: u64) -> Corpus {
    generate_synthetic_corpus(&GeneratorConfig { seed, documents: 25, ..GeneratorConfig::default() }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn positives_account_for_every_near_annotation(seed in 0u64..500) {
        let c = generated(seed);
        let normalizer = TextNormalizer::default();
        let (sets, diag) = build_datasets(&c, &normalizer, 1);
        for ds in &sets {
            let mut near = HashSet::new();
            for d in &c.documents {
                let layout = DocumentLayout::new(d, &normalizer);
                for r in d.relations.iter().filter(|r| r.relation == ds.relation) {
                    let (a, b) = (layout.sentence_of(&r.left).unwrap(), layout.sentence_of(&r.right).unwrap());
                    if a.abs_diff(b) <= 1 {
                        let mut k = [r.left.clone(), r.right.clone()];
                        k.sort();
                        near.insert((d.id.clone(), k));
                    }
                }
            }
            prop_assert_eq!(ds.positives(), near.len());
            prop_assert_eq!(diag.relations[&ds.relation].positives, near.len());
        }
    }

    #[test]
    fn negatives_are_admissible_and_unannotated(seed in 0u64..500) {
        let c = generated(seed);
        let (sets, _) = build_datasets(&c, &TextNormalizer::default(), 1);
        for ds in &sets {
            let rel = c.schema.relation(&ds.relation).unwrap();
            for i in ds.instances.iter().filter(|i| !i.label.is_positive()) {
                let d = c.document(&i.document).unwrap();
                let (l, r) = (d.mention(&i.left).unwrap(), d.mention(&i.right).unwrap());
                prop_assert!(rel.admits(&l.entity_type, &r.entity_type));
                let linked = d.relations.iter().any(|a| a.relation == ds.relation
                    && ((a.left == i.left && a.right == i.right) || (a.left == i.right && a.right == i.left)));
                prop_assert!(!linked);
                // placeholders point back at the argument types
                prop_assert!(i.context.contains(&l.entity_type) && i.context.contains(&r.entity_type));
            }
        }
    }

    #[test]
    fn datasets_are_deterministic(seed in 0u64..500) {
        let c = generated(seed);
        let a = build_datasets(&c, &TextNormalizer::default(), 10);
        let b = build_datasets(&c, &TextNormalizer::default(), 10);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn splits_partition_and_respect_ratios(n in 10usize..400, seed in 0u64..1000) {
        let ds = RelationDataset {
            relation: "R".into(),
            instances: (0..n).map(|k| instance(&format!("i{k:04}"))).collect(),
            provenance: Provenance { corpus: "c".into(), config_hash: "h".into() },
        };
        let splits = make_splits(&ds, [seed, seed + 1, seed + 2]).unwrap();
        prop_assert_eq!(splits.len(), 3);
        for s in &splits {
            let (tr, dv, te) = (s.train.len(), s.dev.len(), s.test.len());
            prop_assert_eq!(tr + dv + te, n);
            let exact = [0.6 * n as f64, 0.1 * n as f64, 0.3 * n as f64];
            for (got, want) in [tr, dv, te].iter().zip(exact) {
                prop_assert!((*got as f64 - want).abs() <= 1.0);
            }
            prop_assert!(tr as f64 >= exact[0]);
            let all: BTreeSet<&String> = s.train.iter().chain(&s.dev).chain(&s.test).collect();
            prop_assert_eq!(all.len(), n);
        }
        prop_assert_eq!(&splits, &make_splits(&ds, [seed, seed + 1, seed + 2]).unwrap());
    }

    #[test]
    fn curve_subsets_nest(n in 1usize..300, seed in 0u64..1000) {
        let train: Vec<String> = (0..n).map(|k| format!("i{k}")).collect();
        let fr = learning_curve_fractions(&train, seed);
        prop_assert_eq!(fr.len(), 9);
        for (k, f) in fr.iter().enumerate() {
            let exact = (k + 1) as f64 * n as f64 / 10.0;
            prop_assert!((f.len() as f64 - exact).abs() <= 0.5);
        }
        for w in fr.windows(2) {
            let small: BTreeSet<&String> = w[0].iter().collect();
            let large: BTreeSet<&String> = w[1].iter().collect();
            prop_assert!(small.is_subset(&large));
        }
    }
}

fn instance(id: &str) -> RelationInstance {
    RelationInstance {
        id: id.into(),
        relation: "R".into(),
        document: "d".into(),
        left: "T1".into(),
        right: "T2".into(),
        context: vec!["a".into()],
        raw_context: "a".into(),
        label: Label::Negative,
        cross_sentence: false,
    }
}

#[test]
fn split_and_curve_size_examples() {
    assert_eq!(split_sizes(100), (60, 10, 30));
    assert_eq!(split_sizes(101), (61, 10, 30));
    assert_eq!(curve_sizes(100), [10, 20, 30, 40, 50, 60, 70, 80, 90]);
    assert_eq!(curve_sizes(37), [4, 7, 11, 15, 19, 22, 26, 30, 33]);
}

#[test]
fn tiny_datasets_cannot_be_split() {
    let ds = RelationDataset {
        relation: "R".into(),
        instances: (0..9).map(|k| instance(&format!("i{k}"))).collect(),
        provenance: Provenance { corpus: "c".into(), config_hash: "h".into() },
    };
    assert!(matches!(make_splits(&ds, [1, 2, 3]), Err(DatasetError::TooSmall { .. })));
}

#[test]
fn dataset_and_split_files_round_trip() {
    let c = generated(4);
    let (sets, _) = build_datasets(&c, &TextNormalizer::default(), 10);
    let ds = &sets[0];
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.jsonl");
    ds.write_jsonl(&path).unwrap();
    let back = RelationDataset::read_jsonl(&ds.relation, ds.provenance.clone(), &path).unwrap();
    assert_eq!(&back, ds);

    let sf = SplitFile { relation: ds.relation.clone(), splits: make_splits(ds, [1, 2, 3]).unwrap() };
    let sp = dir.path().join("r.splits.json");
    sf.write(&sp).unwrap();
    assert_eq!(SplitFile::read(&sp).unwrap(), sf);

    let mut bad = sf.clone();
    let leaked = bad.splits[0].test[0].clone();
    bad.splits[0].train.push(leaked);
    bad.write(&sp).unwrap();
    assert!(SplitFile::read(&sp).is_err());
}
