//! Checks against full-size public assets. Ignored by default; point
//! `CSC_REAL_GRAPH` at an assertion dump and `CSC_REAL_EMBEDDINGS` at an
//! embedding file, then run with `--ignored`.

use std::collections::HashSet;
use std::path::PathBuf;

use csc_core::embedding::EmbeddingIndex;
use csc_core::graph::{ConceptGraph, LocalGraph, PartOfSpeech};

fn env_path(name: &str) -> PathBuf {
    PathBuf::from(std::env::var_os(name).unwrap_or_else(|| panic!("set {name}")))
}

#[test]
#[ignore]
fn real_graph_warm_has_cold_antonym() {
    let (graph, report) = LocalGraph::ingest(env_path("CSC_REAL_GRAPH"), "en").unwrap();
    assert!(report.kept > 0);
    let graph = ConceptGraph::local(graph);
    let found: Vec<String> = graph
        .antonyms("warm", Some(PartOfSpeech::Adjective))
        .unwrap()
        .into_iter()
        .map(|a| a.term.lemma)
        .collect();
    assert!(found.contains(&"cold".to_string()), "{found:?}");
    let calm: Vec<String> = graph.antonyms("calm", None).unwrap().into_iter().map(|a| a.term.lemma).collect();
    assert!(!calm.is_empty());
}

#[test]
#[ignore]
fn real_embeddings_keep_their_invariants() {
    let index = EmbeddingIndex::open(env_path("CSC_REAL_EMBEDDINGS")).unwrap();
    for term in ["warm", "cold", "kinetic", "calm", "elegant"] {
        if index.contains(term) {
            assert!((index.similarity(term, term).unwrap() - 1.0).abs() <= 1e-6);
        }
    }
    let near = index.top_k_neighbors("warm", 10, &HashSet::new()).unwrap();
    assert_eq!(near.len(), 10);
    assert!(near.windows(2).all(|w| w[0].1 >= w[1].1));
}
