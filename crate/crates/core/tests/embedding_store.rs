mod common;

use std::collections::HashSet;
use std::io::Write;

use common::{fixture_dir, testdata};
use csc_core::embedding::{load_embeddings, EmbeddingIndex};
use csc_core::scoring::{phrase_score, BracketTable};
use proptest::prelude::*;

/// Pairs and float64 cosines computed from the raw fixture text by numpy.
fn similarity_oracle() -> Vec<(String, String, f64)> {
    std::fs::read_to_string(testdata("similarity_oracle.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].to_string(), f[2].parse().unwrap())
        })
        .collect()
}

fn fixture_index() -> EmbeddingIndex {
    load_embeddings(fixture_dir().join("embeddings.txt"), None).unwrap().0
}

#[test]
fn fixture_similarities_match_float64_oracle() {
    let index = fixture_index();
    let oracle = similarity_oracle();
    assert!(oracle.len() >= 5);
    for (a, b, expected) in oracle {
        let got = index.similarity(&a, &b).unwrap();
        assert!((got - expected).abs() <= 1e-6, "{a}/{b}: {got} vs {expected}");
    }
}

#[test]
fn kinetic_warm_phrase_score_is_the_bracket_of_its_similarity() {
    let index = fixture_index();
    let table = BracketTable::default();
    let (_, _, s) = similarity_oracle()
        .into_iter()
        .find(|(a, b, _)| a == "kinetic" && b == "warm")
        .unwrap();
    assert_eq!(phrase_score("kinetic", "warm", &table, &index).unwrap(), table.score(s));
    assert_eq!(table.score(s), 4.0);
}

#[test]
fn text_and_cache_loads_compare_equal() {
    let text = fixture_dir().join("embeddings.txt");
    let a = fixture_index();
    let b = EmbeddingIndex::open(&text).unwrap();
    assert_eq!(a, b);
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("emb.bin");
    a.write_cache(&cache).unwrap();
    assert_eq!(EmbeddingIndex::open(&cache).unwrap(), a);
}

#[test]
fn filter_keeps_only_listed_terms() {
    let keep: HashSet<String> = ["kinetic", "warm", "nonexistent"].iter().map(|s| s.to_string()).collect();
    let (index, report) = load_embeddings(fixture_dir().join("embeddings.txt"), Some(&keep)).unwrap();
    assert_eq!(index.len(), 2);
    assert_eq!(report.filtered, 230);
}

#[test]
fn excluding_every_term_leaves_nothing() {
    let index = fixture_index();
    let all: HashSet<String> = index.terms().map(str::to_string).collect();
    assert!(index.top_k_neighbors("warm", 10, &all).unwrap().is_empty());
}

fn random_index() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (1usize..6).prop_flat_map(|dim| {
        (
            Just(dim),
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, dim), 2..40),
        )
    })
}

fn build(dim: usize, rows: &[Vec<f64>]) -> Option<EmbeddingIndex> {
    let named = rows.iter().enumerate().map(|(i, v)| (format!("t{i:03}"), v.clone()));
    EmbeddingIndex::from_vectors(dim, "proptest", named).ok()
}

proptest! {
    #[test]
    fn self_similarity_is_one_and_similarity_is_symmetric((dim, rows) in random_index()) {
        let Some(index) = build(dim, &rows) else { return Ok(()) };
        let terms: Vec<String> = index.terms().map(str::to_string).collect();
        for a in &terms {
            prop_assert!((index.similarity(a, a).unwrap() - 1.0).abs() <= 1e-6);
            for b in &terms {
                prop_assert_eq!(
                    index.similarity(a, b).unwrap().to_bits(),
                    index.similarity(b, a).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn neighbors_equal_the_exhaustive_oracle((dim, rows) in random_index(), k in 1usize..50, q in 0usize..40) {
        let Some(index) = build(dim, &rows) else { return Ok(()) };
        let terms: Vec<String> = index.terms().map(str::to_string).collect();
        let query = &terms[q % terms.len()];
        let mut oracle: Vec<(String, f64)> = terms
            .iter()
            .filter(|t| *t != query)
            .map(|t| (t.clone(), index.similarity(query, t).unwrap()))
            .collect();
        oracle.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        oracle.truncate(k);
        prop_assert_eq!(index.top_k_neighbors(query, k, &HashSet::new()).unwrap(), oracle);
    }

    #[test]
    fn same_file_loads_to_equal_indexes((dim, rows) in random_index()) {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        for (i, v) in rows.iter().enumerate() {
            let vals: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            writeln!(file, "w{i} {}", vals.join(" ")).unwrap();
        }
        file.flush().unwrap();
        let a = load_embeddings(file.path(), None);
        let b = load_embeddings(file.path(), None);
        match (a, b) {
            (Ok((a, _)), Ok((b, _))) => { prop_assert_eq!(a.dim(), dim); prop_assert_eq!(a, b) }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "loads disagree"),
        }
    }
}
