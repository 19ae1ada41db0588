//! In-memory index over a tab-separated assertion dump.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;

use super::{
    Assertion, Direction, EdgeSource, GraphError, Neighbor, PartOfSpeech, Relation, Result,
    TermSense,
};

pub const CACHE_MAGIC: &[u8; 6] = b"CSGRF1";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows: usize,
    pub kept: usize,
    pub dropped_language: usize,
    pub dropped_multiword: usize,
    pub malformed: usize,
}

impl IngestReport {
    pub fn dropped(&self) -> usize {
        self.dropped_language + self.dropped_multiword + self.malformed
    }
}

type AdjacencyKey = (String, Relation);

#[derive(Debug, Clone, Default)]
pub struct LocalGraph {
    language: String,
    source_id: String,
    assertions: Vec<Assertion>,
    outgoing: HashMap<AdjacencyKey, Vec<Neighbor>>,
    incoming: HashMap<AdjacencyKey, Vec<Neighbor>>,
    senses: HashMap<String, BTreeSet<PartOfSpeech>>,
}

fn parse_row(line: &str) -> Option<(Relation, &str, &str, f64)> {
    let mut cols = line.split('\t');
    let _uri = cols.next()?;
    let relation = Relation::parse(cols.next()?);
    let start = cols.next()?;
    let end = cols.next()?;
    let meta: serde_json::Value = serde_json::from_str(cols.next()?).ok()?;
    let weight = meta.get("weight")?.as_f64()?;
    (weight.is_finite() && weight >= 0.0).then_some((relation, start, end, weight))
}

fn sort_adjacency(map: &mut HashMap<AdjacencyKey, Vec<Neighbor>>) {
    for list in map.values_mut() {
        list.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.sense.lemma.cmp(&b.sense.lemma))
                .then_with(|| a.sense.pos.cmp(&b.sense.pos))
        });
    }
}

impl LocalGraph {
    /// Reads an assertion dump (plain or gzip) keeping `language` edges.
    pub fn ingest(path: impl AsRef<Path>, language: &str) -> Result<(LocalGraph, IngestReport)> {
        let path = path.as_ref();
        let io_err = |source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut magic = [0u8; 2];
        let n = File::open(path)
            .and_then(|mut f| f.read(&mut magic))
            .map_err(io_err)?;
        let file = File::open(path).map_err(io_err)?;
        let reader: Box<dyn BufRead> = if n == 2 && magic == [0x1f, 0x8b] {
            Box::new(BufReader::new(GzDecoder::new(file)))
        } else {
            Box::new(BufReader::new(file))
        };
        Self::read_dump(reader, language, &path.display().to_string()).map_err(|e| match e {
            GraphError::Io { source, .. } => io_err(source),
            other => other,
        })
    }

    pub fn read_dump<R: BufRead>(
        reader: R,
        language: &str,
        source_id: &str,
    ) -> Result<(LocalGraph, IngestReport)> {
        let mut report = IngestReport::default();
        let mut assertions = Vec::new();
        for line in reader.lines() {
            let line = line.map_err(|source| GraphError::Io {
                path: source_id.into(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            report.rows += 1;
            let Some((relation, start, end, weight)) = parse_row(&line) else {
                report.malformed += 1;
                continue;
            };
            let (Some(start), Some(end)) = (TermSense::from_uri(start), TermSense::from_uri(end))
            else {
                report.malformed += 1;
                continue;
            };
            if start.language != language || end.language != language {
                report.dropped_language += 1;
                continue;
            }
            if start.is_multiword() || end.is_multiword() {
                report.dropped_multiword += 1;
                continue;
            }
            report.kept += 1;
            assertions.push(Assertion {
                relation,
                start,
                end,
                weight,
            });
        }
        if assertions.is_empty() {
            return Err(GraphError::NoAssertions(source_id.to_string()));
        }
        tracing::info!(
            kept = report.kept,
            dropped = report.dropped(),
            "ingested assertions"
        );
        Ok((Self::from_assertions(language, source_id, assertions), report))
    }

    pub fn from_assertions(language: &str, source_id: &str, assertions: Vec<Assertion>) -> Self {
        let mut g = LocalGraph {
            language: language.to_string(),
            source_id: source_id.to_string(),
            ..Default::default()
        };
        for a in &assertions {
            for sense in [&a.start, &a.end] {
                let tags = g.senses.entry(sense.lemma.clone()).or_default();
                if let Some(p) = sense.pos {
                    tags.insert(p);
                }
            }
            g.outgoing
                .entry((a.start.lemma.clone(), a.relation.clone()))
                .or_default()
                .push(Neighbor {
                    sense: a.end.clone(),
                    weight: a.weight,
                });
            let reverse = if a.relation.is_symmetric() {
                &mut g.outgoing
            } else {
                &mut g.incoming
            };
            reverse
                .entry((a.end.lemma.clone(), a.relation.clone()))
                .or_default()
                .push(Neighbor {
                    sense: a.start.clone(),
                    weight: a.weight,
                });
        }
        sort_adjacency(&mut g.outgoing);
        sort_adjacency(&mut g.incoming);
        g.assertions = assertions;
        g
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn assertion_count(&self) -> usize {
        self.assertions.len()
    }

    pub fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    pub fn lemma_count(&self) -> usize {
        self.senses.len()
    }

    /// Writes the `CSGRF1` cache: magic, language, u64 assertion count, then
    /// per assertion the relation name, start and end senses (lemma + pos
    /// byte) and an f64 weight. Strings are u32-length-prefixed UTF-8.
    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
        self.encode(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)
    }

    fn encode<W: Write>(&self, w: &mut W) -> io::Result<()> {
        fn string<W: Write>(w: &mut W, s: &str) -> io::Result<()> {
            w.write_all(&(s.len() as u32).to_le_bytes())?;
            w.write_all(s.as_bytes())
        }
        fn sense<W: Write>(w: &mut W, s: &TermSense) -> io::Result<()> {
            string(w, &s.lemma)?;
            w.write_all(&[pos_code(s.pos)])
        }
        w.write_all(CACHE_MAGIC)?;
        string(w, &self.language)?;
        w.write_all(&(self.assertions.len() as u64).to_le_bytes())?;
        for a in &self.assertions {
            string(w, a.relation.name())?;
            sense(w, &a.start)?;
            sense(w, &a.end)?;
            w.write_all(&a.weight.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::decode(&bytes, &path.display().to_string())
    }

    fn decode(bytes: &[u8], source_id: &str) -> Result<Self> {
        let mut cur = ByteReader { bytes, pos: 0 };
        if cur.take(6)? != CACHE_MAGIC {
            return Err(GraphError::Cache("wrong magic".into()));
        }
        let language = cur.string()?;
        let count = cur.u64()? as usize;
        let mut assertions = Vec::with_capacity(count.min(1 << 20));
        for _ in 0..count {
            let relation = Relation::parse(&cur.string()?);
            let start = cur.sense(&language)?;
            let end = cur.sense(&language)?;
            let weight = f64::from_bits(cur.u64()?);
            assertions.push(Assertion {
                relation,
                start,
                end,
                weight,
            });
        }
        if cur.pos != bytes.len() {
            return Err(GraphError::Cache("trailing bytes".into()));
        }
        if assertions.is_empty() {
            return Err(GraphError::NoAssertions(source_id.to_string()));
        }
        Ok(Self::from_assertions(&language, source_id, assertions))
    }

    /// Loads either a `CSGRF1` cache or a dump, detected by magic bytes.
    pub fn open(path: impl AsRef<Path>, language: &str) -> Result<Self> {
        let path = path.as_ref();
        let mut magic = [0u8; 6];
        let n = File::open(path)
            .and_then(|mut f| f.read(&mut magic))
            .map_err(|source| GraphError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        if n == 6 && &magic == CACHE_MAGIC {
            Self::read_cache(path)
        } else {
            Self::ingest(path, language).map(|(g, _)| g)
        }
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| GraphError::Cache("truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        b.copy_from_slice(self.take(8)?);
        Ok(u64::from_le_bytes(b))
    }

    fn string(&mut self) -> Result<String> {
        let b = self.take(4)?;
        let len = u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize;
        String::from_utf8(self.take(len)?.to_vec())
            .map_err(|_| GraphError::Cache("string is not UTF-8".into()))
    }

    fn sense(&mut self, language: &str) -> Result<TermSense> {
        let lemma = self.string()?;
        let pos = decode_pos(self.take(1)?[0])?;
        Ok(TermSense {
            lemma,
            pos,
            language: language.to_string(),
        })
    }
}

fn pos_code(pos: Option<PartOfSpeech>) -> u8 {
    match pos {
        None => 0,
        Some(PartOfSpeech::Adjective) => 1,
        Some(PartOfSpeech::Noun) => 2,
        Some(PartOfSpeech::Verb) => 3,
        Some(PartOfSpeech::Adverb) => 4,
    }
}

fn decode_pos(code: u8) -> Result<Option<PartOfSpeech>> {
    Ok(match code {
        0 => None,
        1 => Some(PartOfSpeech::Adjective),
        2 => Some(PartOfSpeech::Noun),
        3 => Some(PartOfSpeech::Verb),
        4 => Some(PartOfSpeech::Adverb),
        other => return Err(GraphError::Cache(format!("bad pos code {other}"))),
    })
}

impl EdgeSource for LocalGraph {
    fn neighbors(
        &self,
        lemma: &str,
        relation: &Relation,
        direction: Direction,
    ) -> Result<Vec<Neighbor>> {
        let map = if direction == Direction::Incoming && !relation.is_symmetric() {
            &self.incoming
        } else {
            &self.outgoing
        };
        Ok(map
            .get(&(lemma.to_string(), relation.clone()))
            .cloned()
            .unwrap_or_default())
    }

    fn pos_tags(&self, lemma: &str) -> Result<Option<BTreeSet<PartOfSpeech>>> {
        Ok(self.senses.get(lemma).cloned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DUMP: &str = "\
/a/1\t/r/Antonym\t/c/en/warm/a\t/c/en/cold/a\t{\"weight\": 2.0}
/a/2\t/r/Antonym\t/c/fr/chaud/a\t/c/fr/froid/a\t{\"weight\": 2.0}
/a/3\t/r/RelatedTo\t/c/en/warm/a\t/c/en/fr/n\t{\"weight\": 1.0}
/a/4\t/r/RelatedTo\t/c/en/warm_up/v\t/c/en/warm/a\t{\"weight\": 1.0}
/a/5\t/r/DerivedFrom\t/c/en/warmth/n\t/c/en/warm/a\t{\"weight\": 1.0}
/a/6\t/r/RelatedTo\t/c/en/warm/a\t/c/de/warm\t{\"weight\": 1.0}
not a row
/a/7\t/r/RelatedTo\t/c/en/a\t/c/en/b\t{\"dataset\": \"x\"}
";

    #[test]
    fn filters_and_counts() {
        let (g, report) = LocalGraph::read_dump(DUMP.as_bytes(), "en", "t").unwrap();
        assert_eq!(report.rows, 8);
        assert_eq!(report.kept, 3);
        assert_eq!(report.dropped_language, 2);
        assert_eq!(report.dropped_multiword, 1);
        assert_eq!(report.malformed, 2);
        assert_eq!(g.assertion_count(), 3);
    }

    #[test]
    fn non_symmetric_edges_are_directional() {
        let (g, _) = LocalGraph::read_dump(DUMP.as_bytes(), "en", "t").unwrap();
        let out = g
            .neighbors("warm", &Relation::DerivedFrom, Direction::Outgoing)
            .unwrap();
        assert!(out.is_empty());
        let inc = g
            .neighbors("warm", &Relation::DerivedFrom, Direction::Incoming)
            .unwrap();
        assert_eq!(inc[0].sense.lemma, "warmth");
        assert_eq!(inc[0].sense.pos, Some(PartOfSpeech::Noun));
    }

    #[test]
    fn zero_retained_is_an_error() {
        let only_fr = "/a/2\t/r/Antonym\t/c/fr/chaud/a\t/c/fr/froid/a\t{\"weight\": 2.0}\n";
        assert!(matches!(
            LocalGraph::read_dump(only_fr.as_bytes(), "en", "t"),
            Err(GraphError::NoAssertions(_))
        ));
    }

    #[test]
    fn cache_round_trip() {
        let (g, _) = LocalGraph::read_dump(DUMP.as_bytes(), "en", "t").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.bin");
        g.write_cache(&path).unwrap();
        let back = LocalGraph::open(&path, "en").unwrap();
        assert_eq!(back.assertions(), g.assertions());
        assert_eq!(
            back.neighbors("cold", &Relation::Antonym, Direction::Outgoing)
                .unwrap(),
            g.neighbors("cold", &Relation::Antonym, Direction::Outgoing)
                .unwrap()
        );
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 1]).unwrap();
        assert!(matches!(
            LocalGraph::read_cache(&path),
            Err(GraphError::Cache(_))
        ));
    }
}
