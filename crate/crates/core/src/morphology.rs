//! Adjective identification, adjective → noun conversion and stem comparison.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

use crate::graph::{ConceptGraph, Direction, PartOfSpeech, Relation};

const DEFAULT_EXCEPTIONS: &str = include_str!("../data/nominalization.tsv");

#[derive(Debug, Error)]
pub enum TableError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `adjective<TAB>noun`")]
    Malformed { line: usize },
}

/// Adjective → noun conversion data.
///
/// Exceptions win over suffix rules; rules are tried in order and the first
/// matching suffix is replaced.
#[derive(Debug, Clone, PartialEq)]
pub struct NominalizationTable {
    pub exceptions: HashMap<String, String>,
    pub suffix_rules: Vec<(String, String)>,
    pub fallback_suffix: String,
}

impl Default for NominalizationTable {
    fn default() -> Self {
        let exceptions = parse_exceptions(DEFAULT_EXCEPTIONS).expect("bundled table parses");
        NominalizationTable {
            exceptions,
            suffix_rules: default_suffix_rules(),
            fallback_suffix: "ness".into(),
        }
    }
}

fn default_suffix_rules() -> Vec<(String, String)> {
    [
        ("ant", "ance"),
        ("ent", "ence"),
        ("ous", "ousness"),
        ("ile", "ility"),
        ("ic", "icity"),
        ("ble", "bility"),
        ("y", "iness"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect()
}

/// Parses the two-column exception TSV; `#` starts a comment.
pub fn parse_exceptions(text: &str) -> Result<HashMap<String, String>, TableError> {
    let mut out = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split('\t').map(str::trim).filter(|c| !c.is_empty());
        let (Some(adj), Some(noun), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(TableError::Malformed { line: i + 1 });
        };
        out.entry(adj.to_lowercase())
            .or_insert_with(|| noun.to_lowercase());
    }
    Ok(out)
}

impl NominalizationTable {
    /// Default rules with the exceptions read from `path` layered over the
    /// bundled ones.
    pub fn with_exceptions_file(path: impl AsRef<Path>) -> Result<Self, TableError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| TableError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut table = NominalizationTable::default();
        table.exceptions.extend(parse_exceptions(&text)?);
        Ok(table)
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn ends_with_consonant_y(word: &str) -> bool {
    let mut rev = word.chars().rev();
    rev.next() == Some('y') && rev.next().is_some_and(|c| c.is_alphabetic() && !is_vowel(c))
}

/// True when the graph has an adjective sense of `lemma` or the supplied
/// lexicon lists it.
pub fn is_adjective(lemma: &str, graph: &ConceptGraph, extra_lexicon: Option<&HashSet<String>>) -> bool {
    let lemma = lemma.trim().to_lowercase();
    if lemma.is_empty() {
        return false;
    }
    extra_lexicon.is_some_and(|l| l.contains(&lemma)) || graph.has_sense(&lemma, PartOfSpeech::Adjective)
}

/// Noun form of an adjective for the second slot of a concept phrase.
///
/// Resolution order: exception table, a noun reached through a
/// DerivedFrom/FormOf edge sharing the adjective's stem, suffix rules,
/// then the fallback suffix.
pub fn nominalize(adjective: &str, table: &NominalizationTable, graph: Option<&ConceptGraph>) -> String {
    let adj = adjective.trim().to_lowercase();
    if let Some(noun) = table.exceptions.get(&adj) {
        return noun.clone();
    }
    if let Some(noun) = graph.and_then(|g| graph_noun_form(&adj, g)) {
        return noun;
    }
    for (suffix, replacement) in &table.suffix_rules {
        if let Some(stem) = adj.strip_suffix(suffix.as_str()) {
            if stem.chars().count() < 2 {
                continue;
            }
            if suffix == "y" && !ends_with_consonant_y(&adj) {
                continue;
            }
            return format!("{stem}{replacement}");
        }
    }
    if ends_with_consonant_y(&adj) {
        let stem = &adj[..adj.len() - 1];
        return format!("{stem}i{}", table.fallback_suffix);
    }
    format!("{adj}{}", table.fallback_suffix)
}

fn graph_noun_form(adj: &str, graph: &ConceptGraph) -> Option<String> {
    let mut best: Option<(f64, String)> = None;
    for relation in [Relation::DerivedFrom, Relation::FormOf] {
        for direction in [Direction::Incoming, Direction::Outgoing] {
            let Ok(neighbors) = graph.neighbors(adj, &relation, direction) else {
                continue;
            };
            for n in neighbors {
                let lemma = n.sense.lemma;
                if n.sense.pos != Some(PartOfSpeech::Noun) || lemma == adj || !shares_stem(adj, &lemma) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some((w, l)) => n.weight > *w || (n.weight == *w && lemma < *l),
                };
                if better {
                    best = Some((n.weight, lemma));
                }
            }
        }
    }
    best.map(|(_, l)| l)
}

/// A suffix-stripping rule: replace `suffix` by `replacement`, optionally
/// only when a consonant precedes the suffix.
struct StemRule {
    suffix: &'static str,
    replacement: &'static str,
    after_consonant: bool,
}

const fn rule(suffix: &'static str, replacement: &'static str) -> StemRule {
    StemRule {
        suffix,
        replacement,
        after_consonant: false,
    }
}

/// The stemmer's rule list, in priority order. The first applicable rule is
/// applied once; a rule is applicable when the suffix matches and at least
/// three characters of stem remain. Afterwards one trailing `e`, `i` or `y`
/// is dropped when at least three characters remain.
const STEM_RULES: &[StemRule] = &[
    rule("ibility", "ibl"),
    rule("ability", "abl"),
    rule("ousness", ""),
    rule("iveness", ""),
    rule("fulness", ""),
    rule("icity", ""),
    rule("ility", "il"),
    rule("iness", ""),
    rule("ation", ""),
    rule("ness", ""),
    rule("ance", ""),
    rule("ence", ""),
    rule("ancy", ""),
    rule("ency", ""),
    rule("ment", ""),
    rule("ity", ""),
    rule("ful", ""),
    rule("ous", ""),
    rule("ive", ""),
    rule("ant", ""),
    rule("ent", ""),
    rule("ism", ""),
    rule("ic", ""),
    rule("al", ""),
    StemRule {
        suffix: "th",
        replacement: "",
        after_consonant: true,
    },
    rule("ly", ""),
    StemRule {
        suffix: "y",
        replacement: "",
        after_consonant: true,
    },
];

const MIN_STEM: usize = 3;

/// Deterministic rule-list stem of a lowercase word.
pub fn stem(word: &str) -> String {
    let word = word.trim().to_lowercase();
    let mut out = word.clone();
    for r in STEM_RULES {
        let Some(base) = word.strip_suffix(r.suffix) else {
            continue;
        };
        if base.chars().count() < MIN_STEM {
            continue;
        }
        if r.after_consonant && base.chars().last().is_none_or(is_vowel) {
            continue;
        }
        out = format!("{base}{}", r.replacement);
        break;
    }
    if out.chars().count() > MIN_STEM && out.ends_with(['e', 'i', 'y']) {
        out.pop();
    }
    out
}

pub fn shares_stem(a: &str, b: &str) -> bool {
    stem(a) == stem(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LocalGraph;

    fn graph() -> ConceptGraph {
        let dump = "\
/a/1\t/r/RelatedTo\t/c/en/warm/a\t/c/en/cozy/a\t{\"weight\": 1.0}
/a/2\t/r/RelatedTo\t/c/en/warmth/n\t/c/en/heat/n\t{\"weight\": 1.0}
/a/3\t/r/DerivedFrom\t/c/en/gloominess/n\t/c/en/gloomy/a\t{\"weight\": 1.0}
/a/4\t/r/DerivedFrom\t/c/en/gloom/n\t/c/en/gloomy/a\t{\"weight\": 2.0}
";
        ConceptGraph::local(LocalGraph::read_dump(dump.as_bytes(), "en", "t").unwrap().0)
    }

    #[test]
    fn adjective_detection() {
        let g = graph();
        assert!(is_adjective("warm", &g, None));
        assert!(!is_adjective("warmth", &g, None));
        let extra: HashSet<String> = ["soulful".to_string()].into();
        assert!(is_adjective("soulful", &g, Some(&extra)));
        assert!(!is_adjective("soulful", &g, None));
    }

    #[test]
    fn attested_conversions() {
        let t = NominalizationTable::default();
        for (adj, noun) in [
            ("warm", "warmth"),
            ("elegant", "elegance"),
            ("beautiful", "beauty"),
            ("tranquil", "tranquility"),
        ] {
            assert_eq!(nominalize(adj, &t, None), noun);
        }
    }

    #[test]
    fn suffix_rules_and_fallback() {
        let t = NominalizationTable {
            exceptions: HashMap::new(),
            ..Default::default()
        };
        assert_eq!(nominalize("radiant", &t, None), "radiance");
        assert_eq!(nominalize("silent", &t, None), "silence");
        assert_eq!(nominalize("gorgeous", &t, None), "gorgeousness");
        assert_eq!(nominalize("fragile", &t, None), "fragility");
        assert_eq!(nominalize("electric", &t, None), "electricity");
        assert_eq!(nominalize("stable", &t, None), "stability");
        assert_eq!(nominalize("happy", &t, None), "happiness");
        assert_eq!(nominalize("gray", &t, None), "grayness");
        assert_eq!(nominalize("bold", &t, None), "boldness");
        assert_eq!(nominalize("Kinetic", &NominalizationTable::default(), None), "kineticism");
    }

    #[test]
    fn graph_noun_neighbor_precedes_rules() {
        let t = NominalizationTable::default();
        assert_eq!(nominalize("gloomy", &t, Some(&graph())), "gloom");
        assert_eq!(nominalize("gloomy", &t, None), "gloominess");
    }

    #[test]
    fn stems() {
        assert!(shares_stem("elegant", "elegance"));
        assert!(!shares_stem("kinetic", "warm"));
        assert_eq!(stem("warm"), "warm");
        assert_eq!(stem("warmth"), "warm");
        assert!(shares_stem("beautiful", "beauty"));
        assert!(shares_stem("tranquil", "tranquility"));
        assert!(shares_stem("flexible", "flexibility"));
        assert!(!shares_stem("smooth", "smoo"));
    }

    #[test]
    fn exception_file_parsing() {
        let parsed = parse_exceptions("# c\nwarm\twarmth # inline\n\nodd\toddity\n").unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed["odd"], "oddity");
        assert!(matches!(
            parse_exceptions("warm warmth\n"),
            Err(TableError::Malformed { line: 1 })
        ));
    }

    #[test]
    fn bundled_table_is_large_enough() {
        assert!(NominalizationTable::default().exceptions.len() >= 200);
    }
}
