use std::collections::HashSet;
use std::path::Path;

use super::{Result, ScoringError};

/// Adjectives with the number (0 to 5) of raters who marked them usable.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledLexicon {
    pub records: Vec<(String, u8)>,
    pub provenance: String,
}

pub const MAX_COUNT: u8 = 5;

impl LabeledLexicon {
    pub fn new(records: Vec<(String, u8)>, provenance: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, (adj, count)) in records.iter().enumerate() {
            if *count > MAX_COUNT {
                return Err(ScoringError::Lexicon {
                    line: i + 1,
                    reason: format!("count {count} outside 0..={MAX_COUNT}"),
                });
            }
            if !seen.insert(adj.as_str()) {
                return Err(ScoringError::Lexicon {
                    line: i + 1,
                    reason: format!("duplicate adjective {adj}"),
                });
            }
        }
        Ok(LabeledLexicon {
            records,
            provenance: provenance.to_string(),
        })
    }

    /// Parses `adjective<TAB>count` lines; `#` starts a comment.
    pub fn parse(text: &str, provenance: &str) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut records = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| ScoringError::Lexicon { line: i + 1, reason };
            let mut cols = line.split('\t').map(str::trim);
            let (Some(adj), Some(count), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(err("expected `adjective<TAB>count`".into()));
            };
            let count: u8 = count
                .parse()
                .ok()
                .filter(|c| *c <= MAX_COUNT)
                .ok_or_else(|| err(format!("count {count:?} outside 0..={MAX_COUNT}")))?;
            let adj = adj.to_lowercase();
            if !seen.insert(adj.clone()) {
                return Err(err(format!("duplicate adjective {adj}")));
            }
            records.push((adj, count));
        }
        Ok(LabeledLexicon {
            records,
            provenance: provenance.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScoringError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn adjectives(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|(a, _)| a.as_str())
    }
}
