//! Stacking ensemble: walk-forward out-of-fold base predictions (oblivious
//! and leaf-wise boosting plus an LSTM), a two-layer LSTM meta-learner that
//! emits per-timestep simplex weights over the three base predictions, and
//! the final convex combination.

mod meta;
mod model;
mod oof;

pub use meta::{combine, fit_meta, softmax3, MetaModel, WeightTriple};
pub use model::{fit_ensemble, predict_ensemble, predict_ensemble_fresh, EnsembleModel};
pub use oof::{fold_boundaries, fold_model_seed, oof_predictions, OofMatrix, OofRow};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gbdt::{BoostConfig, EfbConfig, GbdtError, GossConfig, TreeMode};
use crate::lstm::{LstmConfig, LstmError};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("{samples} samples cannot fill {k} walk-forward folds")]
    TooFewSamples { samples: usize, k: usize },
    #[error("out-of-fold matrix is empty")]
    EmptyOof,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("meta-learner must use n_layers = 2, got {0}")]
    MetaLayers(usize),
    #[error("ensemble document malformed: {0}")]
    BadDocument(String),
    #[error(transparent)]
    Gbdt(#[from] GbdtError),
    #[error(transparent)]
    Lstm(#[from] LstmError),
}

/// Configuration for the full stacking ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    /// Oblivious-tree boosting base learner.
    pub catboost: BoostConfig,
    /// Leaf-wise boosting base learner with GOSS and EFB.
    pub lightgbm: BoostConfig,
    pub lstm: LstmConfig,
    /// Two-layer meta-learner backbone.
    pub meta: LstmConfig,
    pub k_folds: usize,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            catboost: BoostConfig {
                mode: TreeMode::Oblivious,
                n_iterations: 300,
                learning_rate: 0.05,
                lambda: 3.0,
                depth: 6,
                min_samples_leaf: 1,
                goss: None,
                efb: None,
                ..BoostConfig::default()
            },
            lightgbm: BoostConfig {
                mode: TreeMode::Leafwise,
                n_iterations: 300,
                learning_rate: 0.05,
                lambda: 1.0,
                max_leaves: 31,
                min_samples_leaf: 5,
                goss: Some(GossConfig { top_rate: 0.2, other_rate: 0.1 }),
                efb: Some(EfbConfig::default()),
                ..BoostConfig::default()
            },
            lstm: LstmConfig::default(),
            meta: LstmConfig {
                hidden_size: 16,
                n_layers: 2,
                epochs: 300,
                learning_rate: 0.02,
                ..LstmConfig::default()
            },
            k_folds: 5,
            seed: 0,
        }
    }
}
