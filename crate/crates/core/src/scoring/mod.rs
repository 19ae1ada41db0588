//! Word usefulness and phrase creativity scoring.
//!
//! * [`gbdt`]: squared-error gradient-boosted regression trees over raw
//!   embedding dimensions, with k-fold selection of the round count.
//! * [`bracket`]: similarity bracket table for adjective pairs.
//! * [`lexicon`]: labeled adjective lists used for training.

pub mod bracket;
pub mod gbdt;
pub mod lexicon;

use thiserror::Error;

use crate::embedding::{EmbeddingError, EmbeddingIndex};

pub use bracket::BracketTable;
pub use gbdt::{CvReport, Node, RegressionTree, TrainConfig, WordScorerModel};
pub use lexicon::LabeledLexicon;

#[derive(Debug, Error)]
pub enum ScoringError {
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("need at least {needed} usable records, have {have}")]
    TooFewRecords { needed: usize, have: usize },
    #[error("model expects {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model file: {0}")]
    Format(String),
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error("lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("bracket table: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, ScoringError>;

/// Usefulness of `adjective` in [clip range], predicted from its embedding.
pub fn word_score(adjective: &str, model: &WordScorerModel, index: &EmbeddingIndex) -> Result<f64> {
    let v = index.vector(adjective)?;
    if v.len() != model.dim {
        return Err(ScoringError::DimensionMismatch {
            expected: model.dim,
            found: v.len(),
        });
    }
    let x: Vec<f64> = v.iter().map(|&f| f64::from(f)).collect();
    Ok(model.predict(&x))
}

/// Creativity score of the pair: the bracket score of their cosine similarity.
pub fn phrase_score(w1: &str, w2: &str, table: &BracketTable, index: &EmbeddingIndex) -> Result<f64> {
    Ok(table.score(index.similarity(w1, w2)?))
}

/// Trains the usefulness model on `lexicon` using embedding dimensions as
/// features. Adjectives missing from the index are dropped with a warning.
pub fn train_word_scorer(
    lexicon: &LabeledLexicon,
    index: &EmbeddingIndex,
    config: &TrainConfig,
) -> Result<(WordScorerModel, CvReport)> {
    let mut features = Vec::with_capacity(lexicon.records.len());
    let mut labels = Vec::with_capacity(lexicon.records.len());
    let mut dropped = Vec::new();
    for (adj, count) in &lexicon.records {
        match index.vector(adj) {
            Ok(v) => {
                features.push(v.iter().map(|&f| f64::from(f)).collect::<Vec<f64>>());
                labels.push(f64::from(*count));
            }
            Err(_) => dropped.push(adj.clone()),
        }
    }
    if !dropped.is_empty() {
        tracing::warn!(count = dropped.len(), "lexicon adjectives without embeddings dropped");
    }
    let (model, mut report) = gbdt::train(&features, &labels, config)?;
    report.dropped = dropped;
    Ok((model, report))
}
