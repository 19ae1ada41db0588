//! Word-embedding store.
//!
//! Loads whitespace-separated embedding text (plain or gzip), keeps every
//! vector L2-normalized and answers cosine-similarity and exhaustive
//! nearest-neighbor queries. A compact binary cache (`CSEMB1`) reproduces a
//! text load exactly.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use thiserror::Error;

pub const CACHE_MAGIC: &[u8; 6] = b"CSEMB1";

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: expected {expected} dimensions, found {found}")]
    InconsistentDimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{malformed} of {total} records are malformed")]
    TooManyMalformed { malformed: usize, total: usize },
    #[error("no embeddings were loaded")]
    Empty,
    #[error("missing term: {0}")]
    MissingTerm(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("bad embedding cache: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, EmbeddingError>;

/// Counters produced while loading an embedding text file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub records: usize,
    pub loaded: usize,
    pub malformed: usize,
    pub duplicates: usize,
    pub filtered: usize,
    pub other_language: usize,
    pub header: Option<(usize, usize)>,
}

/// Immutable term → unit-vector map.
///
/// Vectors are stored contiguously in insertion order; `lookup` maps the
/// normalized term to its row.
#[derive(Debug, Clone)]
pub struct EmbeddingIndex {
    dim: usize,
    terms: Vec<String>,
    vectors: Vec<f32>,
    lookup: HashMap<String, usize>,
    source_id: String,
}

impl PartialEq for EmbeddingIndex {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.terms == other.terms && self.vectors == other.vectors
    }
}

/// Normalizes a raw term or graph URI to the index key form.
///
/// `/c/en/warm/a` becomes `warm`; URIs in other languages yield `None`.
pub fn normalize_term(raw: &str) -> Option<String> {
    let bare = if let Some(rest) = raw.strip_prefix("/c/") {
        let mut parts = rest.split('/');
        let lang = parts.next()?;
        if lang != "en" {
            return None;
        }
        parts.next()?
    } else {
        raw
    };
    let term = bare.trim().to_lowercase().replace(' ', "_");
    if term.is_empty() {
        None
    } else {
        Some(term)
    }
}

fn open_maybe_gzip(path: &Path) -> Result<Box<dyn BufRead>> {
    let io_err = |source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = File::open(path).map_err(io_err)?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(io_err)?;
    let file = File::open(path).map_err(io_err)?;
    if n == 2 && magic == GZIP_MAGIC {
        Ok(Box::new(BufReader::new(GzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn l2_normalize(raw: &[f64]) -> Option<Vec<f32>> {
    let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return None;
    }
    Some(raw.iter().map(|x| (x / norm) as f32).collect())
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    let count = it.next()?.parse().ok()?;
    let dim = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((count, dim))
}

/// Loads an embedding text file, optionally restricted to `term_filter`.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    term_filter: Option<&HashSet<String>>,
) -> Result<(EmbeddingIndex, LoadReport)> {
    let path = path.as_ref();
    let reader = open_maybe_gzip(path)?;
    let mut builder = EmbeddingIndex::read_text(reader, term_filter).map_err(|e| match e {
        EmbeddingError::Io { source, .. } => EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })?;
    builder.0.source_id = path.display().to_string();
    Ok(builder)
}

impl EmbeddingIndex {
    /// Builds an index from raw (term, vector) pairs, normalizing each vector.
    /// Duplicate terms keep the first occurrence.
    pub fn from_vectors<I, S>(dim: usize, source_id: &str, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut index = EmbeddingIndex::empty(dim, source_id);
        for (line, (term, raw)) in rows.into_iter().enumerate() {
            if raw.len() != dim {
                return Err(EmbeddingError::InconsistentDimension {
                    line: line + 1,
                    expected: dim,
                    found: raw.len(),
                });
            }
            let Some(term) = normalize_term(term.as_ref()) else {
                continue;
            };
            if let Some(unit) = l2_normalize(&raw) {
                index.push(term, &unit);
            }
        }
        if index.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        Ok(index)
    }

    fn empty(dim: usize, source_id: &str) -> Self {
        EmbeddingIndex {
            dim,
            terms: Vec::new(),
            vectors: Vec::new(),
            lookup: HashMap::new(),
            source_id: source_id.to_string(),
        }
    }

    fn push(&mut self, term: String, unit: &[f32]) -> bool {
        if self.lookup.contains_key(&term) {
            return false;
        }
        self.lookup.insert(term.clone(), self.terms.len());
        self.terms.push(term);
        self.vectors.extend_from_slice(unit);
        true
    }

    /// Parses embedding text from any reader.
    pub fn read_text<R: BufRead>(
        reader: R,
        term_filter: Option<&HashSet<String>>,
    ) -> Result<(EmbeddingIndex, LoadReport)> {
        let mut report = LoadReport::default();
        let mut dim: Option<usize> = None;
        let mut index = EmbeddingIndex::empty(0, "<reader>");
        let mut first = true;

        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|source| EmbeddingError::Io {
                path: PathBuf::from("<reader>"),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            if first {
                first = false;
                if let Some(header) = parse_header(&line) {
                    report.header = Some(header);
                    dim = Some(header.1);
                    continue;
                }
            }
            report.records += 1;
            let mut tokens = line.split_whitespace();
            let raw_term = tokens.next().unwrap_or_default();
            let values: std::result::Result<Vec<f64>, _> =
                tokens.map(|t| t.parse::<f64>()).collect();
            let values = match values {
                Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => v,
                _ => {
                    report.malformed += 1;
                    continue;
                }
            };
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected {
                return Err(EmbeddingError::InconsistentDimension {
                    line: lineno + 1,
                    expected,
                    found: values.len(),
                });
            }
            let Some(term) = normalize_term(raw_term) else {
                report.other_language += 1;
                continue;
            };
            if term_filter.is_some_and(|f| !f.contains(&term)) {
                report.filtered += 1;
                continue;
            }
            let Some(unit) = l2_normalize(&values) else {
                report.malformed += 1;
                continue;
            };
            if index.push(term, &unit) {
                report.loaded += 1;
            } else {
                report.duplicates += 1;
            }
        }

        if report.records > 0 && report.malformed * 2 > report.records {
            return Err(EmbeddingError::TooManyMalformed {
                malformed: report.malformed,
                total: report.records,
            });
        }
        if report.malformed > 0 {
            tracing::warn!(
                malformed = report.malformed,
                records = report.records,
                "skipped malformed embedding lines"
            );
        }
        if index.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        index.dim = dim.unwrap_or(0);
        Ok((index, report))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    /// Terms in load order.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    fn key(term: &str) -> String {
        term.trim().to_lowercase().replace(' ', "_")
    }

    pub fn contains(&self, term: &str) -> bool {
        self.lookup.contains_key(&Self::key(term))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// The stored unit vector for `term`.
    pub fn vector(&self, term: &str) -> Result<&[f32]> {
        let key = Self::key(term);
        self.lookup
            .get(&key)
            .map(|&i| self.row(i))
            .ok_or(EmbeddingError::MissingTerm(key))
    }

    /// Cosine similarity (dot product of unit vectors), clamped to [-1, 1].
    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        let va = self.vector(a)?;
        let vb = self.vector(b)?;
        Ok(dot(va, vb).clamp(-1.0, 1.0))
    }

    /// Exhaustive top-k scan ordered by (-similarity, term).
    pub fn top_k_neighbors(
        &self,
        query: &str,
        k: usize,
        exclude: &HashSet<String>,
    ) -> Result<Vec<(String, f64)>> {
        if k == 0 {
            return Err(EmbeddingError::InvalidK);
        }
        let key = Self::key(query);
        let qi = *self
            .lookup
            .get(&key)
            .ok_or_else(|| EmbeddingError::MissingTerm(key.clone()))?;
        let qv = self.row(qi);
        let mut scored: Vec<(usize, f64)> = (0..self.terms.len())
            .filter(|&i| i != qi && !exclude.contains(&self.terms[i]))
            .map(|i| (i, dot(qv, self.row(i)).clamp(-1.0, 1.0)))
            .collect();
        let cmp = |a: &(usize, f64), b: &(usize, f64)| -> Ordering {
            b.1.total_cmp(&a.1)
                .then_with(|| self.terms[a.0].cmp(&self.terms[b.0]))
        };
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_by(cmp);
        Ok(scored
            .into_iter()
            .map(|(i, s)| (self.terms[i].clone(), s))
            .collect())
    }

    /// Writes the binary cache: magic, dim (u32), count (u64), then per term a
    /// u32 byte length, the UTF-8 term and `dim` little-endian f32 values.
    pub fn write_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
        self.encode(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)
    }

    fn encode<W: Write>(&self, w: &mut W) -> io::Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        w.write_all(&(self.terms.len() as u64).to_le_bytes())?;
        for (i, term) in self.terms.iter().enumerate() {
            w.write_all(&(term.len() as u32).to_le_bytes())?;
            w.write_all(term.as_bytes())?;
            for x in self.row(i) {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_cache(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|source| EmbeddingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut index = Self::decode(&bytes)?;
        index.source_id = path.display().to_string();
        Ok(index)
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(6)? != CACHE_MAGIC {
            return Err(EmbeddingError::Cache("wrong magic".into()));
        }
        let dim = cur.u32()? as usize;
        let count = cur.u64()? as usize;
        let mut index = EmbeddingIndex::empty(dim, "<cache>");
        for _ in 0..count {
            let len = cur.u32()? as usize;
            let term = std::str::from_utf8(cur.take(len)?)
                .map_err(|_| EmbeddingError::Cache("term is not UTF-8".into()))?
                .to_string();
            let raw = cur.take(dim * 4)?;
            let row: Vec<f32> = raw
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            if !index.push(term, &row) {
                return Err(EmbeddingError::Cache("duplicate term".into()));
            }
        }
        if cur.pos != bytes.len() {
            return Err(EmbeddingError::Cache("trailing bytes".into()));
        }
        if index.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        Ok(index)
    }

    /// Loads either a binary cache or embedding text, detected by magic bytes.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut magic = [0u8; 6];
        let n = File::open(path)
            .and_then(|mut f| f.read(&mut magic))
            .map_err(|source| EmbeddingError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        if n == 6 && &magic == CACHE_MAGIC {
            Self::read_cache(path)
        } else {
            load_embeddings(path, None).map(|(index, _)| index)
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| EmbeddingError::Cache("truncated".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(u64::from_le_bytes(a))
    }
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor as IoCursor;

    fn load(text: &str) -> Result<(EmbeddingIndex, LoadReport)> {
        EmbeddingIndex::read_text(IoCursor::new(text.as_bytes()), None)
    }

    #[test]
    fn header_is_detected_and_vectors_normalized() {
        let (index, report) = load("2 4\nwarm 1 0 0 0\ncold 0 2 0 0\n").unwrap();
        assert_eq!(report.header, Some((2, 4)));
        assert_eq!(index.len(), 2);
        assert_eq!(index.dim(), 4);
        assert_eq!(index.vector("cold").unwrap(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn uri_terms_are_stripped() {
        let (index, _) = load("/c/en/warm 1 0 0 0\n/c/fr/chaud 1 0 0 0\n").unwrap();
        assert!(index.contains("warm"));
        assert!(index.contains("WARM"));
        assert_eq!(index.len(), 1);
    }

    #[test]
    fn orthogonal_and_identity_similarity() {
        let (index, _) = load("warm 1 0 0 0\ncold 0 1 0 0\n").unwrap();
        assert_eq!(index.similarity("warm", "cold").unwrap(), 0.0);
        assert!((index.similarity("warm", "warm").unwrap() - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn missing_term_is_named() {
        let (index, _) = load("warm 1 0\n").unwrap();
        match index.similarity("warm", "Cold") {
            Err(EmbeddingError::MissingTerm(t)) => assert_eq!(t, "cold"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicates_keep_first_and_malformed_are_counted() {
        let (index, report) = load("a 1 0\na 0 1\nb x y\nc 0 1\n").unwrap();
        assert_eq!(index.vector("a").unwrap(), &[1.0, 0.0]);
        assert_eq!(report.duplicates, 1);
        assert_eq!(report.malformed, 1);
        assert_eq!(report.loaded, 2);
    }

    #[test]
    fn majority_malformed_is_fatal() {
        assert!(matches!(
            load("a 1 0\nb x y\nc\n"),
            Err(EmbeddingError::TooManyMalformed { .. })
        ));
    }

    #[test]
    fn inconsistent_dimension_is_fatal() {
        assert!(matches!(
            load("a 1 0\nb 1 0 0\n"),
            Err(EmbeddingError::InconsistentDimension { line: 2, .. })
        ));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(load("\n\n"), Err(EmbeddingError::Empty)));
        let filter: HashSet<String> = ["zzz".to_string()].into();
        assert!(matches!(
            EmbeddingIndex::read_text(IoCursor::new(b"a 1 0\n".as_slice()), Some(&filter)),
            Err(EmbeddingError::Empty)
        ));
    }

    #[test]
    fn neighbors_contract() {
        let (index, _) = load("warm 1 0\ncold 0 1\n").unwrap();
        let none = HashSet::new();
        assert!(matches!(
            index.top_k_neighbors("warm", 0, &none),
            Err(EmbeddingError::InvalidK)
        ));
        let got = index.top_k_neighbors("warm", 1, &none).unwrap();
        assert_eq!(got, vec![("cold".to_string(), 0.0)]);
        let all: HashSet<String> = ["warm".into(), "cold".into()].into();
        assert!(index.top_k_neighbors("warm", 5, &all).unwrap().is_empty());
    }

    #[test]
    fn ties_break_lexicographically() {
        let (index, _) = load("q 1 0\nzeta 0 1\nalpha 0 1\nmid 0 -1\n").unwrap();
        let got = index.top_k_neighbors("q", 3, &HashSet::new()).unwrap();
        let names: Vec<_> = got.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, ["alpha", "mid", "zeta"]);
    }

    #[test]
    fn cache_round_trip_and_truncation() {
        let (index, _) = load("2 3\nwarm 1 2 3\ncold -1 0.5 2\n").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.bin");
        index.write_cache(&path).unwrap();
        assert_eq!(EmbeddingIndex::open(&path).unwrap(), index);
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(
            EmbeddingIndex::read_cache(&path),
            Err(EmbeddingError::Cache(_))
        ));
    }

    #[test]
    fn gzip_input_is_detected() {
        use flate2::write::GzEncoder;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.txt.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), flate2::Compression::default());
        enc.write_all(b"warm 3 4\n").unwrap();
        enc.finish().unwrap();
        let (index, _) = load_embeddings(&path, None).unwrap();
        let v = index.vector("warm").unwrap();
        assert!((v[0] - 0.6).abs() < 1e-7 && (v[1] - 0.8).abs() < 1e-7);
    }
}
