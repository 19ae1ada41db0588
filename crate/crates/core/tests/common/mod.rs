#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use csc_core::assets::{load_resources, AssetPaths};
use csc_core::brief::Stopwords;
use csc_core::engine::{Engine, EngineConfig, Resources, UsefulnessScorer};
use csc_core::graph::{Assertion, LocalGraph, Transport, TransportError, TransportResponse};
use csc_core::morphology::NominalizationTable;
use csc_core::scoring::BracketTable;
use serde_json::json;

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture_dir() -> PathBuf {
    repo_root().join("assets/fixture")
}

pub fn testdata(name: &str) -> PathBuf {
    repo_root().join("assets/testdata").join(name)
}

pub fn brief_text(name: &str) -> String {
    std::fs::read_to_string(repo_root().join("assets/briefs").join(name)).expect("bundled brief")
}

pub fn fixture_paths() -> AssetPaths {
    let d = fixture_dir();
    AssetPaths {
        embeddings: d.join("embeddings.txt"),
        graph: d.join("graph.tsv"),
        model: d.join("model.csgbt"),
        brackets: Some(d.join("brackets.toml")),
        nominalization: None,
        stopwords: None,
        adjectives: None,
    }
}

pub fn fixture_resources() -> Arc<Resources> {
    static R: OnceLock<Arc<Resources>> = OnceLock::new();
    R.get_or_init(|| Arc::new(load_resources(&fixture_paths(), None).expect("fixture loads")))
        .clone()
}

pub fn fixture_engine() -> Engine {
    Engine::new(fixture_resources(), EngineConfig::default())
}

/// Fixture index and graph with a hand-set usefulness table.
pub fn engine_with_scores(scores: HashMap<String, f64>) -> Engine {
    engine_with_scorer(Arc::new(scores))
}

pub fn engine_with_scorer(scorer: Arc<dyn UsefulnessScorer>) -> Engine {
    let base = fixture_resources();
    let resources = Resources {
        index: base.index.clone(),
        graph: base.graph.clone(),
        scorer,
        brackets: BracketTable::default(),
        nominalization: NominalizationTable::default(),
        stopwords: Stopwords::bundled().clone(),
        extra_lexicon: None,
    };
    Engine::new(Arc::new(resources), EngineConfig::default())
}

/// Model scores for every embedded term, as a plain table.
pub fn fixture_score_table() -> HashMap<String, f64> {
    let r = fixture_resources();
    r.index
        .terms()
        .filter_map(|t| r.scorer.usefulness(t).map(|s| (t.to_string(), s)))
        .collect()
}

/// Replays remote queries from a fixed set of assertions, in the remote
/// service's JSON shape, counting requests.
pub struct CassetteTransport {
    assertions: Vec<Assertion>,
    pub requests: Mutex<Vec<String>>,
}

impl CassetteTransport {
    pub fn new(assertions: Vec<Assertion>) -> Self {
        CassetteTransport {
            assertions,
            requests: Mutex::new(Vec::new()),
        }
    }

    pub fn from_local(graph: &LocalGraph) -> Self {
        Self::new(graph.assertions().to_vec())
    }

    pub fn request_count(&self) -> usize {
        self.requests.lock().unwrap().len()
    }
}

impl Transport for CassetteTransport {
    fn get(&self, url: &str) -> Result<TransportResponse, TransportError> {
        self.requests.lock().unwrap().push(url.to_string());
        let parsed = reqwest::Url::parse(url).map_err(|e| TransportError::Network(e.to_string()))?;
        let params: BTreeMap<String, String> = parsed.query_pairs().into_owned().collect();
        let node = params.get("node").cloned().unwrap_or_default();
        let lemma = node.rsplit('/').next().unwrap_or_default().to_string();
        let rel = params.get("rel").cloned();
        let edges: Vec<_> = self
            .assertions
            .iter()
            .filter(|a| a.start.lemma == lemma || a.end.lemma == lemma)
            .filter(|a| rel.as_deref().is_none_or(|r| a.relation.uri() == r))
            .map(|a| {
                json!({
                    "rel": {"@id": a.relation.uri()},
                    "start": {"@id": a.start.uri()},
                    "end": {"@id": a.end.uri()},
                    "weight": a.weight,
                })
            })
            .collect();
        Ok(TransportResponse {
            status: 200,
            body: serde_json::to_vec(&json!({ "edges": edges })).unwrap(),
        })
    }
}
