mod common;

use common::{fixture_resources, testdata};
use csc_core::embedding::EmbeddingIndex;
use csc_core::scoring::gbdt::{fit_rounds, train};
use csc_core::scoring::{phrase_score, train_word_scorer, BracketTable, LabeledLexicon, TrainConfig, WordScorerModel};
use proptest::prelude::*;

pub struct Synthetic {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub train_rows: usize,
    pub baseline_test_rmse: f64,
}

/// Rows of y = x1 + x2 + x3 with two noise features, and the numpy
/// predict-the-training-mean RMSE on the held-out rows.
fn synthetic() -> Synthetic {
    let text = std::fs::read_to_string(testdata("synthetic_sum.tsv")).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let vals: Vec<f64> = line.split('\t').map(|v| v.parse().unwrap()).collect();
        y.push(vals[5]);
        x.push(vals[..5].to_vec());
    }
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(testdata("synthetic_sum.json")).unwrap()).unwrap();
    Synthetic {
        x,
        y,
        train_rows: meta["train_rows"].as_u64().unwrap() as usize,
        baseline_test_rmse: meta["baseline_test_rmse"].as_f64().unwrap(),
    }
}

fn rmse(model: &WordScorerModel, x: &[Vec<f64>], y: &[f64]) -> f64 {
    let se: f64 = x.iter().zip(y).map(|(r, t)| (model.predict(r) - t).powi(2)).sum();
    (se / y.len() as f64).sqrt()
}

#[test]
fn synthetic_sum_beats_mean_baseline() {
    let data = synthetic();
    assert_eq!(data.x.len(), 500);
    let (tx, vx) = data.x.split_at(data.train_rows);
    let (ty, vy) = data.y.split_at(data.train_rows);
    let (model, report) = train(tx, ty, &TrainConfig::default()).unwrap();
    assert_eq!(model.trees.len(), report.best_rounds);
    let test = rmse(&model, vx, vy);
    assert!(
        test <= 0.7 * data.baseline_test_rmse,
        "test rmse {test} vs baseline {}",
        data.baseline_test_rmse
    );
}

#[test]
fn training_rmse_never_increases() {
    let data = synthetic();
    let (_, curve) = fit_rounds(&data.x, &data.y, 120, &TrainConfig::default()).unwrap();
    assert_eq!(curve.len(), 121);
    for (r, w) in curve.windows(2).enumerate() {
        assert!(w[1] <= w[0] + 1e-12, "round {}: {} > {}", r + 1, w[1], w[0]);
    }
}

#[test]
fn same_seed_same_model() {
    let data = synthetic();
    let config = TrainConfig {
        max_rounds: 40,
        ..TrainConfig::default()
    };
    let a = train(&data.x[..200], &data.y[..200], &config).unwrap();
    let b = train(&data.x[..200], &data.y[..200], &config).unwrap();
    assert_eq!(a.0, b.0);
    assert_eq!(a.1, b.1);
    assert_eq!(a.0.to_bytes(), b.0.to_bytes());
}

#[test]
fn save_load_predictions_are_bit_identical() {
    let data = synthetic();
    let (model, _) = fit_rounds(&data.x, &data.y, 30, &TrainConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csgbt");
    model.save(&path).unwrap();
    let back = WordScorerModel::load(&path).unwrap();
    assert_eq!(back, model);
    for probe in data.x.iter().take(100) {
        assert_eq!(model.predict(probe).to_bits(), back.predict(probe).to_bits());
    }
}

#[test]
fn degenerate_lexicon_trains_a_constant_model() {
    let r = fixture_resources();
    let records: Vec<(String, u8)> = r.index.terms().take(30).map(|t| (t.to_string(), 3)).collect();
    let lexicon = LabeledLexicon::new(records, "constant").unwrap();
    let (model, report) = train_word_scorer(&lexicon, &r.index, &TrainConfig::default()).unwrap();
    assert!(model.trees.is_empty());
    assert_eq!(model.base_score, 3.0);
    assert_eq!(report.train_rmse, vec![0.0]);
}

#[test]
fn fixture_model_dimension_matches_index() {
    let r = fixture_resources();
    let model = WordScorerModel::load(common::fixture_dir().join("model.csgbt")).unwrap();
    assert_eq!(model.dim, r.index.dim());
    assert!(model.trees.iter().all(|t| t.depth() <= 6));
}

fn small_index() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn predictions_stay_in_clip_range(
        rows in prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 2), -20.0f64..20.0), 12..40),
        probe in prop::collection::vec(-10.0f64..10.0, 2),
    ) {
        let (x, y): (Vec<Vec<f64>>, Vec<f64>) = rows.into_iter().unzip();
        let config = TrainConfig { max_rounds: 15, folds: 3, ..TrainConfig::default() };
        let (model, _) = train(&x, &y, &config).unwrap();
        for r in x.iter().chain(std::iter::once(&probe)) {
            let p = model.predict(r);
            prop_assert!((0.0..=5.0).contains(&p));
        }
    }

    #[test]
    fn phrase_score_is_symmetric(rows in small_index(), i in 0usize..12, j in 0usize..12) {
        let named = rows.iter().enumerate().map(|(k, v)| (format!("w{k}"), v.clone()));
        let Ok(index) = EmbeddingIndex::from_vectors(3, "proptest", named) else { return Ok(()) };
        let terms: Vec<String> = index.terms().map(str::to_string).collect();
        let (a, b) = (&terms[i % terms.len()], &terms[j % terms.len()]);
        let table = BracketTable::default();
        prop_assert_eq!(
            phrase_score(a, b, &table, &index).unwrap(),
            phrase_score(b, a, &table, &index).unwrap()
        );
    }
}
