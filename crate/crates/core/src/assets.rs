//! Loading the shared engine resources from files.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::brief::Stopwords;
use crate::embedding::EmbeddingIndex;
use crate::engine::{ModelScorer, Resources};
use crate::graph::{ConceptGraph, LocalGraph, RemoteGraph};
use crate::morphology::NominalizationTable;
use crate::scoring::{BracketTable, WordScorerModel};

#[derive(Debug, Error)]
#[error("{kind} asset {path}: {reason}")]
pub struct AssetError {
    pub kind: &'static str,
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetPaths {
    /// Embedding text file or `CSEMB1` cache.
    pub embeddings: PathBuf,
    /// Assertion dump or `CSGRF1` cache.
    pub graph: PathBuf,
    pub model: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brackets: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominalization: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    /// Extra adjectives, one per line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjectives: Option<PathBuf>,
}

impl AssetPaths {
    /// Resolves relative paths against `base`.
    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.embeddings);
        fix(&mut self.graph);
        fix(&mut self.model);
        for p in [
            &mut self.brackets,
            &mut self.nominalization,
            &mut self.stopwords,
            &mut self.adjectives,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Every configured file, with a label.
    pub fn files(&self) -> Vec<(&'static str, &Path)> {
        let mut out = vec![
            ("embeddings", self.embeddings.as_path()),
            ("graph", self.graph.as_path()),
            ("model", self.model.as_path()),
        ];
        for (kind, p) in [
            ("brackets", &self.brackets),
            ("nominalization", &self.nominalization),
            ("stopwords", &self.stopwords),
            ("adjectives", &self.adjectives),
        ] {
            if let Some(p) = p {
                out.push((kind, p.as_path()));
            }
        }
        out
    }

    /// First configured file that does not exist.
    pub fn missing(&self) -> Option<(&'static str, &Path)> {
        self.files().into_iter().find(|(_, p)| !p.is_file())
    }
}

fn err(kind: &'static str, path: &Path, reason: impl ToString) -> AssetError {
    AssetError {
        kind,
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn read(kind: &'static str, path: &Path) -> Result<String, AssetError> {
    std::fs::read_to_string(path).map_err(|e| err(kind, path, e))
}

/// Loads every asset; `remote` puts a remote client in front of the local graph.
pub fn load_resources(paths: &AssetPaths, remote: Option<RemoteGraph>) -> Result<Resources, AssetError> {
    if let Some((kind, path)) = paths.missing() {
        return Err(err(kind, path, "file not found"));
    }
    let index = EmbeddingIndex::open(&paths.embeddings).map_err(|e| err("embeddings", &paths.embeddings, e))?;
    let local = LocalGraph::open(&paths.graph, "en").map_err(|e| err("graph", &paths.graph, e))?;
    let graph = match remote {
        Some(client) => ConceptGraph::layered(client, local),
        None => ConceptGraph::local(local),
    };
    let model = WordScorerModel::load(&paths.model).map_err(|e| err("model", &paths.model, e))?;
    if model.dim != index.dim() {
        return Err(err(
            "model",
            &paths.model,
            format!("model expects {} dimensions, embeddings have {}", model.dim, index.dim()),
        ));
    }
    let brackets = match &paths.brackets {
        Some(p) => BracketTable::load(p).map_err(|e| err("brackets", p, e))?,
        None => BracketTable::default(),
    };
    let nominalization = match &paths.nominalization {
        Some(p) => NominalizationTable::with_exceptions_file(p).map_err(|e| err("nominalization", p, e))?,
        None => NominalizationTable::default(),
    };
    let stopwords = match &paths.stopwords {
        Some(p) => Stopwords::parse(&read("stopwords", p)?),
        None => Stopwords::bundled().clone(),
    };
    let extra_lexicon = match &paths.adjectives {
        Some(p) => Some(
            read("adjectives", p)?
                .lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect::<HashSet<String>>(),
        ),
        None => None,
    };
    let index = Arc::new(index);
    let scorer = Arc::new(ModelScorer {
        model: Arc::new(model),
        index: index.clone(),
    });
    Ok(Resources {
        index,
        graph,
        scorer,
        brackets,
        nominalization,
        stopwords,
        extra_lexicon,
    })
}
