use serde::{Deserialize, Serialize};

use crate::dataframe::WindowedDataset;
use crate::gbdt::GbdtModel;
use crate::lstm::{LstmConfig, LstmModel};

use super::meta::{combine, fit_meta, MetaModel, WeightTriple};
use super::oof::{fold_boundaries, oof_predictions, predict_trio, train_trio, BaseTrio, META_STREAM};
use super::{EnsembleConfig, EnsembleError};
use crate::seeding::derive_seed;

/// A fitted stacking ensemble: three refit base models, the meta-learner,
/// and the warm-start triples that give the meta LSTM history at test time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    pub catboost: GbdtModel,
    pub lightgbm: GbdtModel,
    pub lstm: LstmModel,
    pub meta: MetaModel,
    /// In-sample prediction triples for the tail of the training split.
    pub warm_triples: Vec<[f64; 3]>,
    pub k_folds: usize,
    pub fold_bounds: Vec<usize>,
    pub seed: u64,
}

/// Fit the full stack: out-of-fold predictions, meta-learner training, then
/// a refit of all three base models on the whole training split.
/// Deterministic given `(train, config)`.
pub fn fit_ensemble(
    train: &WindowedDataset,
    config: &EnsembleConfig,
) -> Result<EnsembleModel, EnsembleError> {
    let oof = oof_predictions(train, config)?;
    let meta_cfg = LstmConfig {
        n_layers: 2,
        seed: derive_seed(config.seed, META_STREAM),
        ..config.meta.clone()
    };
    let meta = fit_meta(&oof, &meta_cfg)?;

    // Refit on the full training split (fold tag 0).
    let trio = train_trio(train, config, 0)?;

    let warm_len = train.lookback().min(train.n_samples());
    let start = train.n_samples() - warm_len;
    let mut warm_triples = Vec::with_capacity(warm_len);
    for i in start..train.n_samples() {
        warm_triples.push(predict_trio(&trio, train, i)?);
    }

    let BaseTrio { cb, lgb, lstm } = trio;
    Ok(EnsembleModel {
        catboost: cb,
        lightgbm: lgb,
        lstm,
        meta,
        warm_triples,
        k_folds: config.k_folds,
        fold_bounds: fold_boundaries(train.n_samples(), config.k_folds),
        seed: config.seed,
    })
}

fn base_triples(
    model: &EnsembleModel,
    ds: &WindowedDataset,
) -> Result<Vec<[f64; 3]>, EnsembleError> {
    let trio = BaseTrio {
        cb: model.catboost.clone(),
        lgb: model.lightgbm.clone(),
        lstm: model.lstm.clone(),
    };
    (0..ds.n_samples()).map(|i| predict_trio(&trio, ds, i)).collect()
}

/// Predict a test split that chronologically follows the training split:
/// base models produce per-step triples, the meta LSTM consumes a rolling
/// window of them warm-started from the stored training tail (so test step
/// 1 has history), and the final output is the per-step convex combination.
/// Returns predictions plus the weight trace for reporting.
pub fn predict_ensemble(
    model: &EnsembleModel,
    test: &WindowedDataset,
) -> Result<(Vec<f64>, Vec<WeightTriple>), EnsembleError> {
    let triples = base_triples(model, test)?;
    let context = model.warm_triples.len();
    let weights = model.meta.weights_rolling(&model.warm_triples, &triples, context)?;
    let predictions = combine(&weights, &triples)?;
    Ok((predictions, weights))
}

/// Predict every window of a standalone series with no external history:
/// the series itself supplies each step's rolling meta context. Steps whose
/// local window reproduces the training-time context yield bit-identical
/// weights, so replaying the training file reproduces in-run test
/// predictions exactly.
pub fn predict_ensemble_fresh(
    model: &EnsembleModel,
    ds: &WindowedDataset,
) -> Result<(Vec<f64>, Vec<WeightTriple>), EnsembleError> {
    let triples = base_triples(model, ds)?;
    let context = model.warm_triples.len();
    let weights = model.meta.weights_rolling(&[], &triples, context)?;
    let predictions = combine(&weights, &triples)?;
    Ok((predictions, weights))
}

// --- serialization -----------------------------------------------------

const FORMAT_VERSION: u32 = 1;
const KIND: &str = "ensemble";

/// Container document embedding the three base-model documents, the
/// meta-model document, and fold metadata.
#[derive(Serialize, Deserialize)]
struct EnsembleDoc {
    format_version: u32,
    kind: String,
    k_folds: usize,
    fold_bounds: Vec<usize>,
    seed: u64,
    catboost: serde_json::Value,
    lightgbm: serde_json::Value,
    lstm: serde_json::Value,
    meta: serde_json::Value,
    warm_triples: Vec<[f64; 3]>,
}

fn embed(json: String) -> serde_json::Value {
    serde_json::from_str(&json).expect("model documents are valid JSON")
}

impl EnsembleModel {
    pub fn to_json(&self) -> String {
        let doc = EnsembleDoc {
            format_version: FORMAT_VERSION,
            kind: KIND.to_string(),
            k_folds: self.k_folds,
            fold_bounds: self.fold_bounds.clone(),
            seed: self.seed,
            catboost: embed(self.catboost.to_json()),
            lightgbm: embed(self.lightgbm.to_json()),
            lstm: embed(self.lstm.to_json()),
            meta: embed(self.meta.net.to_json()),
            warm_triples: self.warm_triples.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("ensemble document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EnsembleError> {
        let doc: EnsembleDoc =
            serde_json::from_str(text).map_err(|e| EnsembleError::BadDocument(e.to_string()))?;
        if doc.kind != KIND {
            return Err(EnsembleError::BadDocument(format!(
                "kind `{}` is not `{KIND}`",
                doc.kind
            )));
        }
        if doc.format_version != FORMAT_VERSION {
            return Err(EnsembleError::BadDocument(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        let sub = |value: &serde_json::Value| {
            serde_json::to_string(value).expect("sub-document re-serializes")
        };
        Ok(EnsembleModel {
            catboost: GbdtModel::from_json(&sub(&doc.catboost))?,
            lightgbm: GbdtModel::from_json(&sub(&doc.lightgbm))?,
            lstm: LstmModel::from_json(&sub(&doc.lstm))?,
            meta: MetaModel { net: LstmModel::from_json(&sub(&doc.meta))? },
            warm_triples: doc.warm_triples,
            k_folds: doc.k_folds,
            fold_bounds: doc.fold_bounds,
            seed: doc.seed,
        })
    }
}
