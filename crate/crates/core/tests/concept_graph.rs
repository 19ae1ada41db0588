mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Duration;

use common::{fixture_dir, testdata, CassetteTransport};
use csc_core::graph::{
    Assertion, ConceptGraph, LocalGraph, PartOfSpeech, Relation, RemoteConfig, RemoteGraph, TermSense,
    Transport, TransportError, TransportResponse,
};
use proptest::prelude::*;

fn fixture_local() -> LocalGraph {
    LocalGraph::ingest(fixture_dir().join("graph.tsv"), "en").unwrap().0
}

fn remote_over(transport: Arc<dyn Transport>, cache: Option<std::path::PathBuf>) -> RemoteGraph {
    let mut config = RemoteConfig::new("http://cassette.invalid");
    config.min_interval = Duration::ZERO;
    config.cache_dir = cache;
    RemoteGraph::new(config, transport)
}

fn sense(lemma: &str) -> TermSense {
    TermSense {
        lemma: lemma.into(),
        pos: Some(PartOfSpeech::Adjective),
        language: "en".into(),
    }
}

#[test]
fn fixture_ingest_counts() {
    let (graph, report) = LocalGraph::ingest(fixture_dir().join("graph.tsv"), "en").unwrap();
    assert_eq!(report.rows, 303);
    assert_eq!(report.kept, 299);
    assert_eq!(report.dropped_language, 2);
    assert_eq!(report.dropped_multiword, 2);
    assert_eq!(report.malformed, 0);
    assert_eq!(graph.assertion_count(), 299);
}

#[test]
fn fixture_poles_of_the_worked_example() {
    let graph = ConceptGraph::local(fixture_local());
    let lemmas = |q: &str| -> Vec<String> {
        graph
            .antonyms(q, Some(PartOfSpeech::Adjective))
            .unwrap()
            .into_iter()
            .map(|a| a.term.lemma)
            .collect()
    };
    assert_eq!(lemmas("kinetic")[0], "calm");
    assert_eq!(lemmas("warm")[0], "cold");
    assert!(lemmas("calm").contains(&"kinetic".to_string()));
}

#[test]
fn cached_warm_antonym_query_contains_cold() {
    struct File(Vec<u8>);
    impl Transport for File {
        fn get(&self, _url: &str) -> Result<TransportResponse, TransportError> {
            Ok(TransportResponse {
                status: 200,
                body: self.0.clone(),
            })
        }
    }
    let body = std::fs::read(testdata("cassettes/warm_antonym.json")).unwrap();
    let graph = ConceptGraph::remote(remote_over(Arc::new(File(body)), None));
    let found: Vec<String> = graph
        .antonyms("warm", None)
        .unwrap()
        .into_iter()
        .map(|a| a.term.lemma)
        .collect();
    assert_eq!(found, vec!["cold", "chilly", "cool"]);
}

#[test]
fn remote_cache_hits_skip_the_network() {
    let dir = tempfile::tempdir().unwrap();
    let transport = Arc::new(CassetteTransport::from_local(&fixture_local()));
    let graph = ConceptGraph::remote(remote_over(transport.clone(), Some(dir.path().to_path_buf())));
    let first = graph.antonyms("warm", None).unwrap();
    let calls = transport.request_count();
    assert!(calls > 0);
    let second = graph.antonyms("warm", None).unwrap();
    assert_eq!(first, second);
    assert_eq!(transport.request_count(), calls);

    // a fresh client over the same cache directory never touches the network
    let cold = Arc::new(CassetteTransport::new(Vec::new()));
    let again = ConceptGraph::remote(remote_over(cold.clone(), Some(dir.path().to_path_buf())));
    assert_eq!(again.antonyms("warm", None).unwrap(), first);
    assert_eq!(cold.request_count(), 0);
}

#[test]
fn local_and_remote_backends_agree_on_the_fixture() {
    let local_graph = fixture_local();
    let lemmas: BTreeSet<String> = local_graph
        .assertions()
        .iter()
        .flat_map(|a| [a.start.lemma.clone(), a.end.lemma.clone()])
        .collect();
    let transport = Arc::new(CassetteTransport::from_local(&local_graph));
    let local = ConceptGraph::local(local_graph);
    let remote = ConceptGraph::remote(remote_over(transport, None));
    let relations = Relation::default_candidates();
    for lemma in &lemmas {
        for pos in [None, Some(PartOfSpeech::Adjective)] {
            assert_eq!(
                local.related_terms(lemma, pos, &relations, 50).unwrap(),
                remote.related_terms(lemma, pos, &relations, 50).unwrap(),
                "related terms of {lemma}"
            );
            assert_eq!(
                local.antonyms(lemma, pos).unwrap(),
                remote.antonyms(lemma, pos).unwrap(),
                "antonyms of {lemma}"
            );
        }
    }
}

const VOCAB: &[&str] = &["amber", "brisk", "calm", "dense", "eager", "faint", "gentle", "harsh"];

fn assertions() -> impl Strategy<Value = Vec<(usize, usize, u8, u8)>> {
    prop::collection::vec((0..VOCAB.len(), 0..VOCAB.len(), 0u8..3, 1u8..5), 1..30)
}

fn build(rows: &[(usize, usize, u8, u8)]) -> LocalGraph {
    let list = rows
        .iter()
        .filter(|(a, b, _, _)| a != b)
        .map(|&(a, b, rel, w)| Assertion {
            relation: match rel {
                0 => Relation::Antonym,
                1 => Relation::RelatedTo,
                _ => Relation::Synonym,
            },
            start: sense(VOCAB[a]),
            end: sense(VOCAB[b]),
            weight: f64::from(w) * 0.5,
        })
        .collect();
    LocalGraph::from_assertions("en", "proptest", list)
}

proptest! {
    #[test]
    fn direct_antonyms_are_symmetric(rows in assertions()) {
        let graph = ConceptGraph::local(build(&rows));
        for x in VOCAB {
            for a in graph.antonyms(x, None).unwrap().into_iter().filter(|a| !a.indirect) {
                let back = graph.antonyms(&a.term.lemma, None).unwrap();
                prop_assert!(
                    back.iter().any(|b| !b.indirect && b.term.lemma == *x),
                    "{} -> {} but not back", x, a.term.lemma
                );
            }
        }
    }

    #[test]
    fn related_terms_exclude_query_and_are_totally_ordered(rows in assertions()) {
        let graph = ConceptGraph::local(build(&rows));
        let relations = Relation::default_candidates();
        for x in VOCAB {
            let first = graph.related_terms(x, Some(PartOfSpeech::Adjective), &relations, 100).unwrap();
            let second = graph.related_terms(x, Some(PartOfSpeech::Adjective), &relations, 100).unwrap();
            prop_assert_eq!(&first, &second);
            prop_assert!(first.terms.iter().all(|(t, _)| t.lemma != *x));
            prop_assert!(first.terms.iter().all(|(t, _)| t.pos == Some(PartOfSpeech::Adjective)));
            for pair in first.terms.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                prop_assert!(a.1 > b.1 || (a.1 == b.1 && a.0.lemma < b.0.lemma));
            }
        }
    }
}
