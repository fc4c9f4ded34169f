use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relex_core::boc::*;
use relex_core::embeddings::{cosine, EmbeddingTable};

/// 500 words: 50 loose clusters of 10 in a low dimension, so cosines spread
/// across the interesting range.
fn fixture(seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 6;
    let mut t = EmbeddingTable::new(dim, "fixture");
    for c in 0..50 {
        let centre: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spread: f32 = rng.random_range(0.05..0.6);
        for k in 0..10 {
            let v: Vec<f32> = centre.iter().map(|x| x + spread * rng.random_range(-1.0f32..1.0)).collect();
            t.insert(&format!("w{c:02}x{k}"), &v);
        }
    }
    t
}

fn lemmas(table: &EmbeddingTable, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut words: Vec<String> = table.words().iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
    words.push("unknownword".into());
    words.push("TestName".into());
    // a shuffled frequency order
    for i in (1..words.len()).rev() {
        let j = rng.random_range(0..=i);
        words.swap(i, j);
    }
    words
}

#[test]
fn members_are_within_mu_of_their_seed_on_the_500_word_fixture() {
    let table = fixture(1);
    assert_eq!(table.len(), 500);
    let l = lemmas(&table, 2);
    for mu in [0.8, 0.9] {
        let map = build_concept_map(&l, &table, mu).unwrap();
        assert!(map.concept_count() > 0);
        for (lemma, &c) in map.mapping() {
            let seed = map.seed(c).unwrap();
            let cos = cosine(table.get(lemma).unwrap(), table.get(seed).unwrap()).unwrap();
            assert!(cos >= mu, "{lemma} -> {seed}: {cos} < {mu}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn soundness_and_monotonicity(table_seed in 0u64..1000, order_seed in 0u64..1000) {
        let table = fixture(table_seed);
        let l = lemmas(&table, order_seed);
        let mut last = usize::MAX;
        for mu in [0.8, 0.9, 1.0] {
            let map = build_concept_map(&l, &table, mu).unwrap();
            prop_assert!(map.mapped_count() <= last);
            last = map.mapped_count();
            // disjoint members, each mapped to its own concept
            let mut seen = BTreeSet::new();
            for (k, members) in map.members().iter().enumerate() {
                for m in members {
                    prop_assert!(seen.insert(m.clone()));
                    prop_assert_eq!(map.concept_of(m), Some(k as u32 + 1));
                }
            }
            prop_assert_eq!(seen.len(), map.mapped_count());
            for (lemma, &c) in map.mapping() {
                let seed = map.seed(c).unwrap();
                prop_assert!(l.contains(&seed.to_string()));
                let cos = cosine(table.get(lemma).unwrap(), table.get(seed).unwrap()).unwrap();
                prop_assert!(cos >= mu);
            }
            prop_assert_eq!(map.concept_of("TestName"), None);
            prop_assert_eq!(map.concept_of("unknownword"), None);
            let again = build_concept_map(&l, &table, mu).unwrap();
            prop_assert_eq!(map.to_json(), again.to_json());
        }
    }

    #[test]
    fn application_keeps_length_and_placeholders(table_seed in 0u64..100, stream_seed in 0u64..1000) {
        let table = fixture(table_seed);
        let map = build_concept_map(&lemmas(&table, 1), &table, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
        let stream: Vec<String> = (0..20)
            .map(|_| if rng.random_bool(0.2) { "ClinicalFinding".to_string() } else { table.words()[rng.random_range(0..500)].clone() })
            .collect();
        let out = apply_concept_map(&map, &stream);
        prop_assert_eq!(out.len(), stream.len());
        for (t, w) in out.iter().zip(&stream) {
            match t {
                ConceptToken::Placeholder(p) => prop_assert_eq!(p, w),
                ConceptToken::Concept(c) => prop_assert_eq!(map.concept_of(w), Some(*c)),
                ConceptToken::Lemma(x) => {
                    prop_assert_eq!(x, w);
                    prop_assert_eq!(map.concept_of(w), None);
                }
            }
        }
        let empty = ConceptMap::empty(1.0, "fixture");
        prop_assert_eq!(map_terms(&empty, &stream), stream);
    }
}

#[test]
fn stats_summarize_the_map() {
    let table = fixture(3);
    let map = build_concept_map(&lemmas(&table, 4), &table, 0.8).unwrap();
    let stats = concept_stats(&map);
    assert_eq!(stats.concepts, map.concept_count());
    assert_eq!(stats.mapped_lemmas, map.mapped_count());
    let histogram_total: usize = stats.size_histogram.iter().map(|(size, n)| size * n).sum();
    assert_eq!(histogram_total, map.mapped_count());
    assert!(stats.largest.len() <= 10);

    let empty = concept_stats(&ConceptMap::empty(0.9, "x"));
    assert_eq!((empty.concepts, empty.mapped_lemmas), (0, 0));
    assert!(empty.size_histogram.is_empty() && empty.largest.is_empty());
}
