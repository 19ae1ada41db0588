//! Query-adjective extraction from a free-text design brief.

use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::ConceptGraph;
use crate::morphology::is_adjective;

pub const MAX_BRIEF_CHARS: usize = 10_000;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BriefError {
    #[error("design brief is empty")]
    Empty,
    #[error("design brief has {0} characters; the limit is {MAX_BRIEF_CHARS}")]
    TooLong(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignBrief {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
}

impl DesignBrief {
    pub fn new(text: impl Into<String>) -> Result<Self, BriefError> {
        let brief = DesignBrief {
            text: text.into(),
            id: None,
        };
        brief.validate()?;
        Ok(brief)
    }

    pub fn validate(&self) -> Result<(), BriefError> {
        if self.text.trim().is_empty() {
            return Err(BriefError::Empty);
        }
        let n = self.text.chars().count();
        if n > MAX_BRIEF_CHARS {
            return Err(BriefError::TooLong(n));
        }
        Ok(())
    }
}

/// Versioned stopword list; lines starting with `#` are comments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords {
    pub version: String,
    pub words: HashSet<String>,
}

impl Stopwords {
    pub fn parse(text: &str) -> Self {
        let mut version = String::from("unversioned");
        let mut words = HashSet::new();
        for line in text.lines().map(str::trim) {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("stopwords ") {
                    version = v.trim().to_string();
                }
                continue;
            }
            if !line.is_empty() {
                words.insert(line.to_lowercase());
            }
        }
        Stopwords { version, words }
    }

    pub fn bundled() -> &'static Stopwords {
        static LIST: OnceLock<Stopwords> = OnceLock::new();
        LIST.get_or_init(|| Stopwords::parse(DEFAULT_STOPWORDS))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }
}

/// Lowercased word tokens in order. Hyphenated words are emitted whole and
/// then as their parts.
pub fn tokenize(text: &str) -> Vec<String> {
    let lower = text.to_lowercase();
    let mut out = Vec::new();
    for raw in lower.split(|c: char| !(c.is_alphabetic() || c == '-')) {
        let word = raw.trim_matches('-');
        if word.is_empty() {
            continue;
        }
        if word.contains('-') {
            out.push(word.to_string());
            out.extend(word.split('-').filter(|p| !p.is_empty()).map(str::to_string));
        } else {
            out.push(word.to_string());
        }
    }
    out
}

/// Outcome of analysing a brief.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "words", rename_all = "snake_case")]
pub enum QueryWords {
    Found(Vec<String>),
    /// Nothing adjectival in the brief; the user has to type a query.
    NoQueryWords,
}

impl QueryWords {
    pub fn words(&self) -> &[String] {
        match self {
            QueryWords::Found(w) => w,
            QueryWords::NoQueryWords => &[],
        }
    }
}

/// Adjectives of the brief in first-occurrence order.
pub fn extract_query_adjectives(
    brief: &DesignBrief,
    graph: &ConceptGraph,
    extra_lexicon: Option<&HashSet<String>>,
    stopwords: &Stopwords,
) -> Result<QueryWords, BriefError> {
    brief.validate()?;
    let mut seen = HashSet::new();
    let mut words = Vec::new();
    for token in tokenize(&brief.text) {
        if stopwords.contains(&token) || seen.contains(&token) {
            continue;
        }
        if is_adjective(&token, graph, extra_lexicon) {
            seen.insert(token.clone());
            words.push(token);
        }
    }
    Ok(if words.is_empty() {
        QueryWords::NoQueryWords
    } else {
        QueryWords::Found(words)
    })
}
