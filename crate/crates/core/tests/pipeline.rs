use relex_core::corpus::{generate_synthetic_corpus, GeneratorConfig};
use relex_core::features::FeatureKind;
use relex_core::instancegen::{build_datasets, make_splits, DEFAULT_MIN_COUNT};
use relex_core::models::{GridPlan, Hyper, TrainConfig};
use relex_core::pipeline::*;
use relex_core::textproc::TextNormalizer;

#[test]
fn curve_on_the_synonym_cluster_corpus() {
    let cfg = GeneratorConfig::synonym_cluster(5, 60);
    let corpus = generate_synthetic_corpus(&cfg).unwrap();
    let normalizer = TextNormalizer::default();
    let table = generator_embeddings(&cfg, &normalizer, 50, 9, "synthetic");
    let docs = document_lemmas(&corpus, &normalizer);
    let (sets, _) = build_datasets(&corpus, &normalizer, DEFAULT_MIN_COUNT);
    assert_eq!(sets.len(), 1);
    let ds = &sets[0];
    let splits = make_splits(ds, [1, 2, 3]).unwrap();
    let mut gap = 0.0;
    for split in &splits {
        let job = CurveJob {
            kinds: vec![FeatureKind::Bow, FeatureKind::Boc],
            features: FeatureJob { kind: FeatureKind::Bow, mu: 0.9, vocab_cap: DEFAULT_VOCAB_CAP, embeddings: Some(&table), doc_lemmas: &docs },
            plan: GridPlan::single(Hyper::LinearSvm { c: 1.0 }),
            train: TrainConfig::default(),
            seed: 7,
        };
        let curve = run_learning_curve(ds, split, &job).unwrap();
        assert_eq!(curve.series("BoW").len(), 9);
        assert_eq!(curve.series("BoC").len(), 9);
        assert_eq!(curve.test_hash, ids_hash(&split.test));
        let sizes: Vec<usize> = curve.series("BoW").iter().map(|p| p.train_size).collect();
        assert!(sizes.windows(2).all(|w| w[0] < w[1]));
        let at10 = |k: &str| curve.series(k)[0].f1.unwrap_or(0.0);
        gap += at10("BoC") - at10("BoW");
    }
    assert!(gap > 0.0, "BoC does not beat BoW at 10% on average");
}
