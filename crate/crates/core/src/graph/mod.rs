//! Knowledge-graph lookups: related terms and antonyms.
//!
//! A [`ConceptGraph`] fronts a local assertion index, a remote query client,
//! or both. With both configured the remote is consulted first and the local
//! index answers whenever the remote fails.

mod local;
mod remote;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use local::{IngestReport, LocalGraph, CACHE_MAGIC};
pub use remote::{
    HttpTransport, RemoteConfig, RemoteGraph, Transport, TransportError, TransportResponse,
};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("no assertions retained from {0}")]
    NoAssertions(String),
    #[error("limit must be at least 1")]
    InvalidLimit,
    #[error("relation set is empty")]
    NoRelations,
    #[error("bad graph cache: {0}")]
    Cache(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("graph has no backend configured")]
    NoBackend,
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum Relation {
    RelatedTo,
    SimilarTo,
    Synonym,
    Antonym,
    DerivedFrom,
    FormOf,
    Other(String),
}

impl Relation {
    pub fn name(&self) -> &str {
        match self {
            Relation::RelatedTo => "RelatedTo",
            Relation::SimilarTo => "SimilarTo",
            Relation::Synonym => "Synonym",
            Relation::Antonym => "Antonym",
            Relation::DerivedFrom => "DerivedFrom",
            Relation::FormOf => "FormOf",
            Relation::Other(name) => name,
        }
    }

    /// Parses either a bare name (`Antonym`) or a relation URI (`/r/Antonym`).
    pub fn parse(raw: &str) -> Relation {
        let name = raw.strip_prefix("/r/").unwrap_or(raw).trim_end_matches('/');
        match name {
            "RelatedTo" => Relation::RelatedTo,
            "SimilarTo" => Relation::SimilarTo,
            "Synonym" => Relation::Synonym,
            "Antonym" => Relation::Antonym,
            "DerivedFrom" => Relation::DerivedFrom,
            "FormOf" => Relation::FormOf,
            other => Relation::Other(other.to_string()),
        }
    }

    pub fn uri(&self) -> String {
        format!("/r/{}", self.name())
    }

    /// Relations stored in both directions at ingestion.
    pub fn is_symmetric(&self) -> bool {
        matches!(
            self,
            Relation::RelatedTo | Relation::SimilarTo | Relation::Synonym | Relation::Antonym
        )
    }

    pub fn default_candidates() -> Vec<Relation> {
        vec![Relation::RelatedTo, Relation::SimilarTo, Relation::Synonym]
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl From<Relation> for String {
    fn from(r: Relation) -> String {
        r.name().to_string()
    }
}

impl From<String> for Relation {
    fn from(s: String) -> Relation {
        Relation::parse(&s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    Adjective,
    Noun,
    Verb,
    Adverb,
}

impl PartOfSpeech {
    /// Sense-suffix letters used in graph URIs; `s` marks adjective satellites.
    pub fn from_suffix(tag: &str) -> Option<PartOfSpeech> {
        match tag {
            "a" | "s" => Some(PartOfSpeech::Adjective),
            "n" => Some(PartOfSpeech::Noun),
            "v" => Some(PartOfSpeech::Verb),
            "r" => Some(PartOfSpeech::Adverb),
            _ => None,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            PartOfSpeech::Adjective => "a",
            PartOfSpeech::Noun => "n",
            PartOfSpeech::Verb => "v",
            PartOfSpeech::Adverb => "r",
        }
    }

    pub fn parse(name: &str) -> Option<PartOfSpeech> {
        match name.to_ascii_lowercase().as_str() {
            "adjective" | "adj" | "a" | "s" => Some(PartOfSpeech::Adjective),
            "noun" | "n" => Some(PartOfSpeech::Noun),
            "verb" | "v" => Some(PartOfSpeech::Verb),
            "adverb" | "adv" | "r" => Some(PartOfSpeech::Adverb),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TermSense {
    pub lemma: String,
    pub pos: Option<PartOfSpeech>,
    pub language: String,
}

impl TermSense {
    /// Parses `/c/<lang>/<lemma>[/<pos>[/...]]`.
    pub fn from_uri(uri: &str) -> Option<TermSense> {
        let rest = uri.strip_prefix("/c/")?;
        let mut parts = rest.split('/');
        let language = parts.next().filter(|s| !s.is_empty())?.to_string();
        let lemma = parts.next().filter(|s| !s.is_empty())?.to_lowercase();
        let pos = parts.next().and_then(PartOfSpeech::from_suffix);
        Some(TermSense {
            lemma,
            pos,
            language,
        })
    }

    pub fn uri(&self) -> String {
        match self.pos {
            Some(p) => format!("/c/{}/{}/{}", self.language, self.lemma, p.suffix()),
            None => format!("/c/{}/{}", self.language, self.lemma),
        }
    }

    pub fn is_multiword(&self) -> bool {
        self.lemma.contains(['_', ' '])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub relation: Relation,
    pub start: TermSense,
    pub end: TermSense,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub sense: TermSense,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Edges leaving the queried lemma (both directions for symmetric relations).
    Outgoing,
    /// Edges arriving at the queried lemma.
    Incoming,
}

/// A graph backend able to answer per-lemma edge queries.
pub trait EdgeSource: Send + Sync {
    fn neighbors(&self, lemma: &str, relation: &Relation, direction: Direction)
        -> Result<Vec<Neighbor>>;

    /// Part-of-speech tags seen on any sense of `lemma`; `None` when the
    /// lemma is absent from the graph.
    fn pos_tags(&self, lemma: &str) -> Result<Option<BTreeSet<PartOfSpeech>>>;
}

/// Ranked related-term lookup result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelatedTerms {
    pub terms: Vec<(TermSense, f64)>,
    /// False when the query lemma is unknown to the graph.
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntonymCandidate {
    pub term: TermSense,
    pub weight: f64,
    /// Reached through a synonym rather than a direct antonym edge.
    pub indirect: bool,
}

/// Number of synonyms consulted for the indirect antonym tier.
pub const INDIRECT_SYNONYMS: usize = 3;

#[derive(Clone, Default)]
pub struct ConceptGraph {
    local: Option<Arc<LocalGraph>>,
    remote: Option<Arc<RemoteGraph>>,
}

impl fmt::Debug for ConceptGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConceptGraph")
            .field("local", &self.local.as_ref().map(|g| g.assertion_count()))
            .field("remote", &self.remote.as_ref().map(|r| r.endpoint().to_string()))
            .finish()
    }
}

fn rank_order(a: &(TermSense, f64), b: &(TermSense, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.lemma.cmp(&b.0.lemma))
}

impl ConceptGraph {
    pub fn local(graph: LocalGraph) -> Self {
        ConceptGraph {
            local: Some(Arc::new(graph)),
            remote: None,
        }
    }

    pub fn remote(client: RemoteGraph) -> Self {
        ConceptGraph {
            local: None,
            remote: Some(Arc::new(client)),
        }
    }

    /// Remote first, local index on transport failure.
    pub fn layered(client: RemoteGraph, graph: LocalGraph) -> Self {
        ConceptGraph {
            local: Some(Arc::new(graph)),
            remote: Some(Arc::new(client)),
        }
    }

    pub fn local_index(&self) -> Option<&LocalGraph> {
        self.local.as_deref()
    }

    fn with_source<T>(&self, f: impl Fn(&dyn EdgeSource) -> Result<T>) -> Result<T> {
        match (&self.remote, &self.local) {
            (Some(remote), Some(local)) => f(remote.as_ref()).or_else(|err| {
                tracing::warn!(%err, "remote graph failed; using local index");
                f(local.as_ref())
            }),
            (Some(remote), None) => f(remote.as_ref()),
            (None, Some(local)) => f(local.as_ref()),
            (None, None) => Err(GraphError::NoBackend),
        }
    }

    pub fn neighbors(
        &self,
        lemma: &str,
        relation: &Relation,
        direction: Direction,
    ) -> Result<Vec<Neighbor>> {
        let lemma = lemma.to_lowercase();
        self.with_source(|s| s.neighbors(&lemma, relation, direction))
    }

    /// Tags come from the local index when present; it is the lexicon of record.
    pub fn pos_tags(&self, lemma: &str) -> Result<Option<BTreeSet<PartOfSpeech>>> {
        let lemma = lemma.to_lowercase();
        match &self.local {
            Some(local) => local.pos_tags(&lemma),
            None => self.with_source(|s| s.pos_tags(&lemma)),
        }
    }

    pub fn has_sense(&self, lemma: &str, pos: PartOfSpeech) -> bool {
        matches!(self.pos_tags(lemma), Ok(Some(tags)) if tags.contains(&pos))
    }

    /// Applies the part-of-speech filter. Untagged senses pass when the lemma
    /// has a tagged sense of the requested kind elsewhere in the graph.
    fn resolve_pos(&self, mut sense: TermSense, filter: Option<PartOfSpeech>) -> Option<TermSense> {
        let Some(want) = filter else {
            return Some(sense);
        };
        match sense.pos {
            Some(p) if p == want => Some(sense),
            Some(_) => None,
            None if self.has_sense(&sense.lemma, want) => {
                sense.pos = Some(want);
                Some(sense)
            }
            None => None,
        }
    }

    fn collect_ranked(
        &self,
        query: &str,
        pos_filter: Option<PartOfSpeech>,
        relations: &[Relation],
    ) -> Result<Vec<(TermSense, f64)>> {
        let mut best: HashMap<String, (TermSense, f64)> = HashMap::new();
        for relation in relations {
            for n in self.neighbors(query, relation, Direction::Outgoing)? {
                if n.sense.lemma == query {
                    continue;
                }
                let Some(sense) = self.resolve_pos(n.sense, pos_filter) else {
                    continue;
                };
                match best.get_mut(&sense.lemma) {
                    Some(slot) if slot.1 >= n.weight => {}
                    Some(slot) => *slot = (sense, n.weight),
                    None => {
                        best.insert(sense.lemma.clone(), (sense, n.weight));
                    }
                }
            }
        }
        let mut ranked: Vec<_> = best.into_values().collect();
        ranked.sort_by(rank_order);
        Ok(ranked)
    }

    /// Related terms over `relations`, deduplicated by lemma (max weight) and
    /// ranked by (-weight, lemma).
    pub fn related_terms(
        &self,
        query: &str,
        pos_filter: Option<PartOfSpeech>,
        relations: &[Relation],
        limit: usize,
    ) -> Result<RelatedTerms> {
        if limit == 0 {
            return Err(GraphError::InvalidLimit);
        }
        if relations.is_empty() {
            return Err(GraphError::NoRelations);
        }
        let query = query.trim().to_lowercase();
        let found = self.pos_tags(&query)?.is_some();
        if !found {
            return Ok(RelatedTerms {
                terms: Vec::new(),
                found,
            });
        }
        let mut terms = self.collect_ranked(&query, pos_filter, relations)?;
        terms.truncate(limit);
        Ok(RelatedTerms { terms, found })
    }

    /// Direct antonyms ranked by weight; when there are none, antonyms of the
    /// top synonyms, marked indirect.
    pub fn antonyms(
        &self,
        query: &str,
        pos_filter: Option<PartOfSpeech>,
    ) -> Result<Vec<AntonymCandidate>> {
        let query = query.trim().to_lowercase();
        let direct = self.collect_ranked(&query, pos_filter, &[Relation::Antonym])?;
        if !direct.is_empty() {
            return Ok(direct
                .into_iter()
                .map(|(term, weight)| AntonymCandidate {
                    term,
                    weight,
                    indirect: false,
                })
                .collect());
        }
        let synonyms = self.collect_ranked(
            &query,
            pos_filter,
            &[Relation::Synonym, Relation::SimilarTo],
        )?;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (synonym, _) in synonyms.into_iter().take(INDIRECT_SYNONYMS) {
            for (term, weight) in
                self.collect_ranked(&synonym.lemma, pos_filter, &[Relation::Antonym])?
            {
                if term.lemma != query && seen.insert(term.lemma.clone()) {
                    out.push(AntonymCandidate {
                        term,
                        weight,
                        indirect: true,
                    });
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DUMP: &str = "\
/a/1\t/r/Antonym\t/c/en/warm/a\t/c/en/cold/a\t{\"weight\": 2.0}
/a/2\t/r/RelatedTo\t/c/en/warm/a\t/c/en/cozy/a\t{\"weight\": 1.5}
/a/3\t/r/Synonym\t/c/en/hot/a\t/c/en/torrid/a\t{\"weight\": 1.0}
/a/4\t/r/Antonym\t/c/en/torrid/a\t/c/en/frigid/a\t{\"weight\": 1.0}
/a/5\t/r/Synonym\t/c/en/lonely/a\t/c/en/alone/a\t{\"weight\": 1.0}
/a/6\t/r/RelatedTo\t/c/en/warm\t/c/en/toasty\t{\"weight\": 3.0}
/a/7\t/r/RelatedTo\t/c/en/toasty/a\t/c/en/bread/n\t{\"weight\": 1.0}
/a/8\t/r/RelatedTo\t/c/en/warm/a\t/c/en/sunshine/n\t{\"weight\": 0.5}
";

    fn graph() -> ConceptGraph {
        let (g, _) = LocalGraph::read_dump(DUMP.as_bytes(), "en", "fixture").unwrap();
        ConceptGraph::local(g)
    }

    #[test]
    fn symmetric_antonyms() {
        let g = graph();
        let lemmas = |q: &str| -> Vec<String> {
            g.antonyms(q, None)
                .unwrap()
                .into_iter()
                .map(|a| a.term.lemma)
                .collect()
        };
        assert_eq!(lemmas("warm"), ["cold"]);
        assert_eq!(lemmas("cold"), ["warm"]);
    }

    #[test]
    fn related_terms_with_pos_filter() {
        let g = graph();
        let rel = Relation::default_candidates();
        let got = g
            .related_terms("warm", Some(PartOfSpeech::Adjective), &rel, 10)
            .unwrap();
        let lemmas: Vec<_> = got.terms.iter().map(|(t, w)| (t.lemma.as_str(), *w)).collect();
        // toasty is untagged on this edge but has an adjective sense elsewhere
        assert_eq!(lemmas, [("toasty", 3.0), ("cozy", 1.5)]);
        assert!(got.terms.iter().all(|(t, _)| t.pos == Some(PartOfSpeech::Adjective)));

        let nouns = g
            .related_terms("warm", Some(PartOfSpeech::Noun), &rel, 10)
            .unwrap();
        assert_eq!(nouns.terms.len(), 1);
        assert_eq!(nouns.terms[0].0.lemma, "sunshine");
    }

    #[test]
    fn unknown_lemma_is_flagged() {
        let got = graph()
            .related_terms("zzz", None, &Relation::default_candidates(), 5)
            .unwrap();
        assert!(!got.found);
        assert!(got.terms.is_empty());
    }

    #[test]
    fn limit_and_relations_are_validated() {
        let g = graph();
        assert!(matches!(
            g.related_terms("warm", None, &[Relation::RelatedTo], 0),
            Err(GraphError::InvalidLimit)
        ));
        assert!(matches!(
            g.related_terms("warm", None, &[], 3),
            Err(GraphError::NoRelations)
        ));
    }

    #[test]
    fn indirect_antonyms_through_synonyms() {
        let got = graph().antonyms("hot", None).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].term.lemma, "frigid");
        assert!(got[0].indirect);
    }

    #[test]
    fn no_antonyms_and_no_synonyms_is_empty() {
        assert!(graph().antonyms("bread", None).unwrap().is_empty());
        assert!(graph().antonyms("lonely", None).unwrap().is_empty());
    }

    #[test]
    fn relation_and_sense_parsing() {
        assert_eq!(Relation::parse("/r/Antonym"), Relation::Antonym);
        assert_eq!(Relation::parse("/r/IsA"), Relation::Other("IsA".into()));
        let s = TermSense::from_uri("/c/en/warm/a/wn/temperature").unwrap();
        assert_eq!(s.lemma, "warm");
        assert_eq!(s.pos, Some(PartOfSpeech::Adjective));
        assert_eq!(TermSense::from_uri("/c/en/pretty/s").unwrap().pos, Some(PartOfSpeech::Adjective));
        assert_eq!(TermSense::from_uri("/c/en/warm").unwrap().pos, None);
        assert!(TermSense::from_uri("warm").is_none());
    }
}
