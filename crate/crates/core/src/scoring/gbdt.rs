//! Gradient-boosted regression trees for squared error.
//!
//! Training starts from the label mean and adds one tree per round fitted to
//! the current residuals, shrunk by the learning rate. Splits are chosen
//! greedily by variance reduction over a fixed set of quantile cut points per
//! feature; leaves hold the mean residual of their rows. The number of rounds
//! is picked by k-fold cross-validation on mean validation RMSE.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Result, ScoringError};

pub const MODEL_MAGIC: &[u8; 6] = b"CSGBT1";
pub const MODEL_VERSION: u32 = 1;

/// Minimum gain a split must achieve to be taken.
const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_depth: usize,
    pub learning_rate: f64,
    pub max_rounds: usize,
    pub folds: usize,
    pub seed: u64,
    /// Stop once this many rounds pass without a better mean CV RMSE.
    pub early_stop: usize,
    /// Quantile cut points considered per feature.
    pub cut_points: usize,
    pub min_records: usize,
    pub clip_range: (f64, f64),
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_depth: 6,
            learning_rate: 0.05,
            max_rounds: 200,
            folds: 10,
            seed: 0,
            early_stop: 10,
            cut_points: 16,
            min_records: 10,
            clip_range: (0.0, 5.0),
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ScoringError::Config(m.into()));
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if self.cut_points == 0 || self.cut_points > 255 {
            return bad("cut_points must be in 1..=255");
        }
        if self.clip_range.0 > self.clip_range.1 {
            return bad("clip range is inverted");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub max_depth: usize,
}

impl RegressionTree {
    pub fn leaf(value: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf { value }],
            max_depth: 0,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature as usize] < threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    /// Depth of the deepest leaf (a lone leaf has depth 0).
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + walk(nodes, left as usize).max(walk(nodes, right as usize))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    fn check(&self, dim: usize) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(ScoringError::Format("empty tree".into()));
        }
        // children must point forward so every path terminates
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Split {
                feature,
                left,
                right,
                ..
            } = *node
            {
                let (l, r) = (left as usize, right as usize);
                if feature as usize >= dim || l <= i || r <= i || l >= n || r >= n {
                    return Err(ScoringError::Format(format!("bad split at node {i}")));
                }
            }
        }
        if self.depth() > self.max_depth {
            return Err(ScoringError::Format("tree deeper than its max depth".into()));
        }
        Ok(())
    }
}

/// Ensemble predicting clip(base + rate × Σ trees).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordScorerModel {
    pub base_score: f64,
    pub trees: Vec<RegressionTree>,
    pub learning_rate: f64,
    pub dim: usize,
    pub clip_range: (f64, f64),
}

impl WordScorerModel {
    pub fn constant(base_score: f64, dim: usize, clip_range: (f64, f64)) -> Self {
        WordScorerModel {
            base_score,
            trees: Vec::new(),
            learning_rate: 0.0,
            dim,
            clip_range,
        }
    }

    pub fn predict_raw(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        self.base_score + self.learning_rate * sum
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_raw(x).clamp(self.clip_range.0, self.clip_range.1)
    }

    /// Serializes to the `CSGBT1` format.
    ///
    /// Layout (little endian): magic, u32 version, u32 dim, f64 base score,
    /// f64 learning rate, f64 clip low, f64 clip high, u32 tree count; per
    /// tree u32 max depth and u32 node count; per node a tag byte followed by
    /// either (0) f64 leaf value or (1) u32 feature, f64 threshold, u32 left,
    /// u32 right.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MODEL_MAGIC);
        out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in [
            self.base_score,
            self.learning_rate,
            self.clip_range.0,
            self.clip_range.1,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.trees.len() as u32).to_le_bytes());
        for tree in &self.trees {
            out.extend_from_slice(&(tree.max_depth as u32).to_le_bytes());
            out.extend_from_slice(&(tree.nodes.len() as u32).to_le_bytes());
            for node in &tree.nodes {
                match *node {
                    Node::Leaf { value } => {
                        out.push(0);
                        out.extend_from_slice(&value.to_le_bytes());
                    }
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        out.push(1);
                        out.extend_from_slice(&feature.to_le_bytes());
                        out.extend_from_slice(&threshold.to_le_bytes());
                        out.extend_from_slice(&left.to_le_bytes());
                        out.extend_from_slice(&right.to_le_bytes());
                    }
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(6)? != MODEL_MAGIC {
            return Err(ScoringError::Format("not a CSGBT1 model".into()));
        }
        let version = r.u32()?;
        if version != MODEL_VERSION {
            return Err(ScoringError::Version(version));
        }
        let dim = r.u32()? as usize;
        let base_score = r.f64()?;
        let learning_rate = r.f64()?;
        let clip_range = (r.f64()?, r.f64()?);
        let n_trees = r.u32()? as usize;
        let mut trees = Vec::with_capacity(n_trees.min(1 << 16));
        for _ in 0..n_trees {
            let max_depth = r.u32()? as usize;
            let n_nodes = r.u32()? as usize;
            let mut nodes = Vec::with_capacity(n_nodes.min(1 << 16));
            for _ in 0..n_nodes {
                nodes.push(match r.take(1)?[0] {
                    0 => Node::Leaf { value: r.f64()? },
                    1 => Node::Split {
                        feature: r.u32()?,
                        threshold: r.f64()?,
                        left: r.u32()?,
                        right: r.u32()?,
                    },
                    tag => return Err(ScoringError::Format(format!("bad node tag {tag}"))),
                });
            }
            let tree = RegressionTree { nodes, max_depth };
            tree.check(dim)?;
            trees.push(tree);
        }
        if r.pos != bytes.len() {
            return Err(ScoringError::Format("trailing bytes".into()));
        }
        Ok(WordScorerModel {
            base_score,
            trees,
            learning_rate,
            dim,
            clip_range,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|source| ScoringError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|source| ScoringError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| ScoringError::Format("truncated model file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64(&mut self) -> Result<f64> {
        let mut a = [0u8; 8];
        a.copy_from_slice(self.take(8)?);
        Ok(f64::from_le_bytes(a))
    }
}

/// Cross-validation and training diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// `fold_rmse[r][k]`: validation RMSE of fold `k` after `r` rounds
    /// (row 0 is the base score alone).
    pub fold_rmse: Vec<Vec<f64>>,
    pub mean_rmse: Vec<f64>,
    pub best_rounds: usize,
    pub best_cv_rmse: f64,
    /// Training RMSE of the final model after each round (row 0 = base).
    pub train_rmse: Vec<f64>,
    pub records: usize,
    /// Lexicon entries without an embedding.
    pub dropped: Vec<String>,
}

/// Quantile cut points of one feature, strictly ascending, none equal to the
/// minimum (such a cut could never send a row left).
fn quantile_cuts(values: &mut [f64], count: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let mut cuts: Vec<f64> = (1..=count)
        .map(|q| values[(q * n / (count + 1)).min(n - 1)])
        .filter(|&c| c > values[0])
        .collect();
    cuts.dedup();
    cuts
}

/// Feature matrix pre-bucketed against per-feature cut points.
struct Binned {
    cuts: Vec<Vec<f64>>,
    /// Row-major bucket indices: `bins[row * dim + f]`.
    bins: Vec<u8>,
    dim: usize,
}

impl Binned {
    fn new(x: &[Vec<f64>], rows: &[usize], dim: usize, cut_points: usize) -> Binned {
        let cuts: Vec<Vec<f64>> = (0..dim)
            .map(|f| {
                let mut col: Vec<f64> = rows.iter().map(|&r| x[r][f]).collect();
                quantile_cuts(&mut col, cut_points)
            })
            .collect();
        let mut bins = Vec::with_capacity(x.len() * dim);
        for row in x {
            for (f, c) in cuts.iter().enumerate() {
                bins.push(c.partition_point(|&t| t <= row[f]) as u8);
            }
        }
        Binned { cuts, bins, dim }
    }

    fn bin(&self, row: usize, f: usize) -> usize {
        self.bins[row * self.dim + f] as usize
    }
}

struct TreeBuilder<'a> {
    binned: &'a Binned,
    residuals: &'a [f64],
    max_depth: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn build(mut self, rows: &mut [usize]) -> RegressionTree {
        self.grow(rows, 0);
        RegressionTree {
            nodes: self.nodes,
            max_depth: self.max_depth,
        }
    }

    fn best_split(&self, rows: &[usize], total: f64) -> Option<(usize, usize, f64)> {
        let n = rows.len() as f64;
        let parent = total * total / n;
        let mut best: Option<(usize, usize, f64)> = None;
        for (f, cuts) in self.binned.cuts.iter().enumerate() {
            if cuts.is_empty() {
                continue;
            }
            let mut count = vec![0usize; cuts.len() + 1];
            let mut sum = vec![0.0f64; cuts.len() + 1];
            for &r in rows {
                let b = self.binned.bin(r, f);
                count[b] += 1;
                sum[b] += self.residuals[r];
            }
            let (mut nl, mut sl) = (0usize, 0.0f64);
            for j in 0..cuts.len() {
                nl += count[j];
                sl += sum[j];
                let nr = rows.len() - nl;
                if nl == 0 || nr == 0 {
                    continue;
                }
                let sr = total - sl;
                let gain = sl * sl / nl as f64 + sr * sr / nr as f64 - parent;
                if gain > MIN_GAIN && best.is_none_or(|(_, _, g)| gain > g) {
                    best = Some((f, j, gain));
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: &mut [usize], depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let total: f64 = rows.iter().map(|&r| self.residuals[r]).sum();
        let mean = total / rows.len() as f64;
        self.nodes.push(Node::Leaf { value: mean });
        if depth >= self.max_depth || rows.len() < 2 {
            return id;
        }
        let Some((feature, cut, _)) = self.best_split(rows, total) else {
            return id;
        };
        // stable partition: bucket <= cut goes left
        let (mut left, mut right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.binned.bin(r, feature) <= cut);
        let l = self.grow(&mut left, depth + 1);
        let r = self.grow(&mut right, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: feature as u32,
            threshold: self.binned.cuts[feature][cut],
            left: l,
            right: r,
        };
        id
    }
}

/// Boosting state over a subset of rows, advanced one round at a time.
struct Booster<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    train: Vec<usize>,
    binned: Binned,
    /// Current raw prediction for every row in `x`.
    pred: Vec<f64>,
    base: f64,
    trees: Vec<RegressionTree>,
    config: &'a TrainConfig,
}

impl<'a> Booster<'a> {
    fn new(x: &'a [Vec<f64>], y: &'a [f64], train: Vec<usize>, config: &'a TrainConfig) -> Self {
        let dim = x.first().map_or(0, Vec::len);
        let base = train.iter().map(|&r| y[r]).sum::<f64>() / train.len() as f64;
        let binned = Binned::new(x, &train, dim, config.cut_points);
        Booster {
            x,
            y,
            train,
            binned,
            pred: vec![base; x.len()],
            base,
            trees: Vec::new(),
            config,
        }
    }

    fn step(&mut self) {
        let mut residuals = vec![0.0; self.x.len()];
        for &r in &self.train {
            residuals[r] = self.y[r] - self.pred[r];
        }
        let mut rows = self.train.clone();
        let tree = TreeBuilder {
            binned: &self.binned,
            residuals: &residuals,
            max_depth: self.config.max_depth,
            nodes: Vec::new(),
        }
        .build(&mut rows);
        for (p, row) in self.pred.iter_mut().zip(self.x) {
            *p += self.config.learning_rate * tree.predict(row);
        }
        self.trees.push(tree);
    }

    fn rmse(&self, rows: &[usize]) -> f64 {
        rmse(rows.iter().map(|&r| (self.pred[r], self.y[r])))
    }

    fn into_model(self) -> WordScorerModel {
        WordScorerModel {
            base_score: self.base,
            trees: self.trees,
            learning_rate: self.config.learning_rate,
            dim: self.binned.dim,
            clip_range: self.config.clip_range,
        }
    }
}

fn rmse(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    let (mut se, mut n) = (0.0, 0usize);
    for (p, y) in pairs {
        se += (p - y) * (p - y);
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (se / n as f64).sqrt()
    }
}

/// Assigns rows to folds after a seeded shuffle.
fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![Vec::new(); folds];
    for (pos, row) in order.into_iter().enumerate() {
        out[pos % folds].push(row);
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

/// Trains on all rows for exactly `rounds` rounds, recording training RMSE.
pub fn fit_rounds(
    x: &[Vec<f64>],
    y: &[f64],
    rounds: usize,
    config: &TrainConfig,
) -> Result<(WordScorerModel, Vec<f64>)> {
    config.validate()?;
    check_shape(x, y)?;
    let all: Vec<usize> = (0..x.len()).collect();
    let mut booster = Booster::new(x, y, all.clone(), config);
    let mut history = vec![booster.rmse(&all)];
    for _ in 0..rounds {
        booster.step();
        history.push(booster.rmse(&all));
    }
    Ok((booster.into_model(), history))
}

fn check_shape(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(ScoringError::Config(format!(
            "{} feature rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    let dim = x.first().map_or(0, Vec::len);
    if let Some(bad) = x.iter().find(|r| r.len() != dim) {
        return Err(ScoringError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    Ok(dim)
}

/// Full training: k-fold selection of the round count, then a final fit on
/// every row. All-equal labels give a constant model with no trees.
pub fn train(x: &[Vec<f64>], y: &[f64], config: &TrainConfig) -> Result<(WordScorerModel, CvReport)> {
    config.validate()?;
    let dim = check_shape(x, y)?;
    if x.len() < config.min_records.max(config.folds) {
        return Err(ScoringError::TooFewRecords {
            needed: config.min_records.max(config.folds),
            have: x.len(),
        });
    }
    if y.iter().all(|&v| v == y[0]) {
        let model = WordScorerModel::constant(y[0], dim, config.clip_range);
        let report = CvReport {
            best_rounds: 0,
            train_rmse: vec![0.0],
            records: x.len(),
            ..Default::default()
        };
        return Ok((model, report));
    }

    let folds = fold_assignment(x.len(), config.folds, config.seed);
    let mut boosters: Vec<(Booster, Vec<usize>)> = folds
        .iter()
        .map(|val| {
            let train: Vec<usize> = (0..x.len()).filter(|r| val.binary_search(r).is_err()).collect();
            (Booster::new(x, y, train, config), val.clone())
        })
        .collect();

    let snapshot = |boosters: &[(Booster, Vec<usize>)]| -> Vec<f64> {
        boosters.iter().map(|(b, val)| b.rmse(val)).collect()
    };
    let mut report = CvReport {
        records: x.len(),
        ..Default::default()
    };
    let first = snapshot(&boosters);
    report.mean_rmse.push(first.iter().sum::<f64>() / first.len() as f64);
    report.fold_rmse.push(first);
    let (mut best_rounds, mut best) = (0usize, report.mean_rmse[0]);

    for round in 1..=config.max_rounds {
        for (b, _) in &mut boosters {
            b.step();
        }
        let fold = snapshot(&boosters);
        let m = fold.iter().sum::<f64>() / fold.len() as f64;
        report.fold_rmse.push(fold);
        report.mean_rmse.push(m);
        if m < best {
            best = m;
            best_rounds = round;
        } else if round - best_rounds >= config.early_stop {
            break;
        }
    }
    report.best_rounds = best_rounds;
    report.best_cv_rmse = best;

    let (model, history) = fit_rounds(x, y, best_rounds, config)?;
    report.train_rmse = history;
    Ok((model, report))
}
