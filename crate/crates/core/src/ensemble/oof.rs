use chrono::NaiveDate;

use crate::dataframe::WindowedDataset;
use crate::gbdt::{fit_gbdt, BoostConfig, GbdtModel};
use crate::lstm::{fit_lstm, LstmConfig, LstmModel};
use crate::seeding::derive_seed;

use super::{EnsembleConfig, EnsembleError};

/// One leakage-free row: base predictions for a timestep produced by models
/// whose training folds all precede it.
#[derive(Debug, Clone, PartialEq)]
pub struct OofRow {
    pub timestamp: NaiveDate,
    /// 1-based fold id; always >= 2 since fold 1 has no predecessor models.
    pub fold: usize,
    pub cb: f64,
    pub lstm: f64,
    pub lgb: f64,
    pub target: f64,
}

impl OofRow {
    /// Canonical meta-input order: (CB, LSTM, LGB).
    pub fn triple(&self) -> [f64; 3] {
        [self.cb, self.lstm, self.lgb]
    }
}

/// Chronological out-of-fold predictions for the meta-learner.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OofMatrix {
    pub rows: Vec<OofRow>,
}

impl OofMatrix {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn triples(&self) -> Vec<[f64; 3]> {
        self.rows.iter().map(OofRow::triple).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.target).collect()
    }
}

/// Contiguous chronological fold boundaries: fold `j` (1-based) spans
/// `[bounds[j-1], bounds[j])`.
pub fn fold_boundaries(n_samples: usize, k_folds: usize) -> Vec<usize> {
    (0..=k_folds).map(|j| j * n_samples / k_folds).collect()
}

/// Stream tags for per-(fold, model) seed derivation. Fold 0 denotes the
/// full-training refit.
pub fn fold_model_seed(base_seed: u64, fold: usize, model: usize) -> u64 {
    derive_seed(base_seed, (fold as u64) * 8 + model as u64)
}

pub(crate) const MODEL_CB: usize = 0;
pub(crate) const MODEL_LSTM: usize = 1;
pub(crate) const MODEL_LGB: usize = 2;
pub(crate) const META_STREAM: u64 = 0x77;

pub(crate) struct BaseTrio {
    pub cb: GbdtModel,
    pub lgb: GbdtModel,
    pub lstm: LstmModel,
}

/// Train the three base learners on one training slice; the three trainings
/// are independent (own derived seeds), so they may run concurrently.
pub(crate) fn train_trio(
    train: &WindowedDataset,
    config: &EnsembleConfig,
    fold: usize,
) -> Result<BaseTrio, EnsembleError> {
    let cb_cfg = BoostConfig {
        seed: fold_model_seed(config.seed, fold, MODEL_CB),
        ..config.catboost.clone()
    };
    let lgb_cfg = BoostConfig {
        seed: fold_model_seed(config.seed, fold, MODEL_LGB),
        ..config.lightgbm.clone()
    };
    let lstm_cfg = LstmConfig {
        seed: fold_model_seed(config.seed, fold, MODEL_LSTM),
        ..config.lstm.clone()
    };

    let columns = train.flat_columns();
    let targets = train.targets();
    let (gbdt_pair, lstm) = rayon::join(
        || {
            rayon::join(
                || fit_gbdt(&columns, targets, &cb_cfg),
                || fit_gbdt(&columns, targets, &lgb_cfg),
            )
        },
        || fit_lstm(train, &lstm_cfg),
    );
    let (cb, lgb) = gbdt_pair;
    Ok(BaseTrio { cb: cb?, lgb: lgb?, lstm: lstm? })
}

pub(crate) fn predict_trio(
    trio: &BaseTrio,
    ds: &WindowedDataset,
    i: usize,
) -> Result<[f64; 3], EnsembleError> {
    let flat = ds.flat_input(i);
    let cb = trio.cb.predict(flat)?;
    let lgb = trio.lgb.predict(flat)?;
    let lstm = trio.lstm.predict_window(ds, i)?;
    Ok([cb, lstm, lgb])
}

/// Walk-forward out-of-fold predictions.
///
/// The training split is cut into `k_folds` contiguous chronological folds;
/// fold `j` is predicted by base models trained on folds `1..j-1` only.
/// Fold 1 has no predictors and is excluded, so every returned row has
/// `fold >= 2`. Deterministic given `(train, config)`.
pub fn oof_predictions(
    train: &WindowedDataset,
    config: &EnsembleConfig,
) -> Result<OofMatrix, EnsembleError> {
    let n = train.n_samples();
    let k = config.k_folds;
    if k < 2 || n < k {
        return Err(EnsembleError::TooFewSamples { samples: n, k });
    }
    let bounds = fold_boundaries(n, k);

    let mut rows = Vec::with_capacity(n - bounds[1]);
    for fold in 2..=k {
        let train_end = bounds[fold - 1];
        let fold_range = bounds[fold - 1]..bounds[fold];
        let history = train.slice(0..train_end);
        let trio = train_trio(&history, config, fold)?;
        for i in fold_range {
            let [cb, lstm, lgb] = predict_trio(&trio, train, i)?;
            rows.push(OofRow {
                timestamp: train.sample_timestamps()[i],
                fold,
                cb,
                lstm,
                lgb,
                target: train.targets()[i],
            });
        }
    }
    Ok(OofMatrix { rows })
}
