//! Hybrid time-series forecasting engine.
//!
//! The crate combines three base learners — a leaf-wise gradient-boosted
//! tree model with gradient-based one-side sampling and exclusive feature
//! bundling, an oblivious-tree boosting model with ordered target
//! statistics, and a from-scratch LSTM regressor — under a stacking
//! meta-learner that blends their predictions with per-timestep simplex
//! weights.
//!
//! Modules:
//! - [`dataframe`]: CSV ingestion, cleaning, min-max scaling, windowing.
//! - [`gbdt`]: histogram-based gradient boosting (leaf-wise and oblivious).
//! - [`lstm`]: LSTM forward pass, backpropagation through time, Adam.
//! - [`ensemble`]: walk-forward out-of-fold stacking with an LSTM meta-learner.
//! - [`metrics`]: MAE / MSE / RMSE / R² evaluation and report rows.
//!
//! Everything is deterministic given a seed: identical inputs and seeds
//! produce bit-identical models regardless of worker-thread count.

pub mod dataframe;
pub mod ensemble;
pub mod gbdt;
pub mod lstm;
pub mod metrics;
pub mod seeding;
