use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Result, ScoringError};

/// Similarity brackets with one score each; bins are half-open `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketTable {
    #[serde(rename = "edges")]
    pub bin_edges: Vec<f64>,
    #[serde(rename = "scores")]
    pub bin_scores: Vec<f64>,
    #[serde(rename = "default")]
    pub default_score: f64,
}

impl Default for BracketTable {
    /// Width-0.1 bins over [0, 1) peaking on [0.3, 0.5).
    fn default() -> Self {
        BracketTable {
            bin_edges: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            bin_scores: vec![1.0, 1.5, 2.5, 4.0, 4.0, 3.0, 2.0, 1.5, 1.0, 0.5],
            default_score: 0.5,
        }
    }
}

impl BracketTable {
    pub fn new(bin_edges: Vec<f64>, bin_scores: Vec<f64>, default_score: f64) -> Result<Self> {
        let t = BracketTable {
            bin_edges,
            bin_scores,
            default_score,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_edges.len() < 2 {
            return Err(ScoringError::Bracket("need at least two edges".into()));
        }
        if self.bin_edges.iter().any(|e| !e.is_finite())
            || self.bin_edges.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(ScoringError::Bracket("edges must be finite and strictly ascending".into()));
        }
        if self.bin_scores.len() + 1 != self.bin_edges.len() {
            return Err(ScoringError::Bracket(format!(
                "{} edges need {} scores, got {}",
                self.bin_edges.len(),
                self.bin_edges.len() - 1,
                self.bin_scores.len()
            )));
        }
        Ok(())
    }

    /// Index of the bin containing `similarity`, if any.
    pub fn bin(&self, similarity: f64) -> Option<usize> {
        if !(self.bin_edges[0]..*self.bin_edges.last()?).contains(&similarity) {
            return None;
        }
        // first edge strictly greater than s, minus one
        Some(self.bin_edges.partition_point(|&e| e <= similarity) - 1)
    }

    pub fn score(&self, similarity: f64) -> f64 {
        self.bin(similarity)
            .map_or(self.default_score, |i| self.bin_scores[i])
    }

    /// Reads the TOML form: `edges = [...]`, `scores = [...]`, `default = x`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let t: BracketTable =
            toml::from_str(text).map_err(|e| ScoringError::Bracket(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("bracket table serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScoringError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }
}
