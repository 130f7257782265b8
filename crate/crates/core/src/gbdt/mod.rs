//! Histogram-based gradient-boosted regression trees.
//!
//! Two growth modes share one training engine:
//! - `LeafWise`: best-first growth with optional gradient-based one-side
//!   sampling (GOSS) and exclusive feature bundling (EFB).
//! - `Oblivious`: symmetric trees where every node at a level applies the
//!   same split; pairs with ordered target statistics for categorical columns.
//!
//! Loss is squared error: `g_i = F(x_i) - y_i`, `h_i = 1`. Leaf values are
//! `-G / (H + lambda)` and split gain is
//! `0.5 * [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G_P^2/(H_P+l)] - gamma`.
//!
//! Training is deterministic given `(dataset, config, seed)` regardless of
//! worker-thread count: histograms are accumulated per feature in ascending
//! sample order and combined in fixed feature order.

mod binning;
mod bundle;
mod config;
mod goss;
mod histogram;
mod model;
mod ordered_ts;
mod split;
mod tree;

pub use binning::{bin_feature, bin_value, compute_bin_edges, BinnedFeature};
pub use bundle::{efb_bundle, singleton_bundles, BundleMember, FeatureBundle};
pub use config::{BoostConfig, EfbConfig, GossConfig, TreeMode};
pub use goss::goss_sample;
pub use histogram::{build_histograms, FeatureHistogram, HistBin};
pub use model::{fit_gbdt, predict_gbdt, GbdtModel};
pub use ordered_ts::{ordered_target_stats, seeded_permutation};
pub use split::{best_split, NodeStats, SplitCandidate, SplitParams};
pub use tree::{grow_tree_leafwise, grow_tree_oblivious, Tree, TreeNode};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GbdtError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("GOSS budget exceeds data: top {top} + other {other} > {n} samples")]
    SampleBudgetExceedsData { top: usize, other: usize, n: usize },
    #[error("feature row has {got} values; model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("dataset is empty or misaligned: {0}")]
    BadDataset(String),
    #[error("model document malformed: {0}")]
    BadDocument(String),
}
