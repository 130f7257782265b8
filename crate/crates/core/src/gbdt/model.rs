use serde::{Deserialize, Serialize};

use super::binning::bin_feature;
use super::bundle::{build_bundle_columns, efb_bundle, feature_locations, singleton_bundles};
use super::config::{BoostConfig, TreeMode};
use super::goss::goss_sample;
use super::split::SplitParams;
use super::tree::{grow_leafwise_view, grow_oblivious_view, TrainView, Tree, TreeNode};
use super::GbdtError;

/// A fitted boosting model: `F(x) = F_0 + learning_rate * Σ_m tree_m(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtModel {
    pub config: BoostConfig,
    pub n_features: usize,
    /// `F_0`, the mean of the training targets.
    pub base_prediction: f64,
    pub trees: Vec<Tree>,
    /// Quantile bin edges per feature, as used during training.
    pub bin_edges: Vec<Vec<f64>>,
    /// Squared-error training loss after each iteration.
    pub training_mse: Vec<f64>,
}

impl GbdtModel {
    pub fn predict(&self, row: &[f64]) -> Result<f64, GbdtError> {
        predict_gbdt(self, row)
    }

    /// Predictions for a row-major batch.
    pub fn predict_batch(&self, rows: &[&[f64]]) -> Result<Vec<f64>, GbdtError> {
        rows.iter().map(|row| self.predict(row)).collect()
    }
}

/// Fit a boosting model on column-major features.
///
/// `features[f][i]` is feature `f` of sample `i`. Loss is squared error:
/// per iteration `g_i = F(x_i) - y_i`, `h_i = 1`, optionally GOSS-reweighted,
/// and the new tree's contribution is scaled by the learning rate.
/// Deterministic given `(features, targets, config)`.
pub fn fit_gbdt(
    features: &[Vec<f64>],
    targets: &[f64],
    config: &BoostConfig,
) -> Result<GbdtModel, GbdtError> {
    config.validate()?;
    let n = targets.len();
    if n == 0 {
        return Err(GbdtError::BadDataset("no samples".into()));
    }
    if features.is_empty() {
        return Err(GbdtError::BadDataset("no feature columns".into()));
    }
    if let Some(bad) = features.iter().position(|c| c.len() != n) {
        return Err(GbdtError::BadDataset(format!(
            "feature column {bad} has {} values for {n} targets",
            features[bad].len()
        )));
    }
    let d = features.len();

    let binned: Vec<_> = features.iter().map(|c| bin_feature(c, config.n_bins)).collect();
    let bundles = match &config.efb {
        Some(efb) => efb_bundle(&binned, efb.conflict_budget),
        None => singleton_bundles(&binned),
    };
    let bundle_cols = build_bundle_columns(&binned, &bundles, n);
    let locs = feature_locations(&bundles, d);
    let params = SplitParams {
        lambda: config.lambda,
        gamma: config.gamma,
        min_samples_leaf: config.min_samples_leaf as u64,
    };

    // Row-major copy for residual updates and prediction routing.
    let mut rows = vec![0.0; n * d];
    for (f, col) in features.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            rows[i * d + f] = v;
        }
    }

    let base_prediction = targets.iter().sum::<f64>() / n as f64;
    let mut current: Vec<f64> = vec![base_prediction; n];
    let mut rng = crate::seeding::seeded_rng(config.seed);

    let mut trees = Vec::with_capacity(config.n_iterations);
    let mut training_mse = Vec::with_capacity(config.n_iterations);
    let hessians = vec![1.0; n];

    for m in 0..config.n_iterations {
        let gradients: Vec<f64> = current.iter().zip(targets).map(|(f, y)| f - y).collect();

        let (root_samples, weights) = match &config.goss {
            Some(goss) if m >= config.goss_warmup => {
                let (selected, sel_weights) = goss_sample(&gradients, goss, &mut rng)?;
                let mut full = vec![1.0; n];
                for (&i, &w) in selected.iter().zip(&sel_weights) {
                    full[i as usize] = w;
                }
                (selected, full)
            }
            _ => ((0..n as u32).collect(), vec![1.0; n]),
        };

        let view = TrainView {
            binned: &binned,
            bundles: &bundles,
            bundle_cols: &bundle_cols,
            locs: &locs,
            gradients: &gradients,
            hessians: &hessians,
            weights: &weights,
            params,
        };
        let tree = match config.mode {
            TreeMode::Leafwise => grow_leafwise_view(&view, root_samples, config.max_leaves),
            TreeMode::Oblivious => grow_oblivious_view(&view, root_samples, config.depth),
        };

        for i in 0..n {
            current[i] += config.learning_rate * tree.predict(&rows[i * d..(i + 1) * d]);
        }
        trees.push(tree);

        let mse = current
            .iter()
            .zip(targets)
            .map(|(f, y)| (f - y) * (f - y))
            .sum::<f64>()
            / n as f64;
        training_mse.push(mse);
    }

    Ok(GbdtModel {
        config: config.clone(),
        n_features: d,
        base_prediction,
        trees,
        bin_edges: binned.into_iter().map(|b| b.edges).collect(),
        training_mse,
    })
}

/// `F_0 + learning_rate * Σ tree outputs` for one feature row.
pub fn predict_gbdt(model: &GbdtModel, row: &[f64]) -> Result<f64, GbdtError> {
    if row.len() != model.n_features {
        return Err(GbdtError::DimensionMismatch {
            got: row.len(),
            expected: model.n_features,
        });
    }
    let mut out = model.base_prediction;
    for tree in &model.trees {
        out += model.config.learning_rate * tree.predict(row);
    }
    Ok(out)
}

// --- serialization -----------------------------------------------------

const FORMAT_VERSION: u32 = 1;
const KIND: &str = "gbdt";

/// Flattened node arrays: `feature = -1` marks a leaf.
#[derive(Serialize, Deserialize)]
struct TreeDoc {
    mode: TreeMode,
    features: Vec<i64>,
    thresholds: Vec<f64>,
    lefts: Vec<u32>,
    rights: Vec<u32>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GbdtModelDoc {
    format_version: u32,
    kind: String,
    config: BoostConfig,
    n_features: usize,
    base_prediction: f64,
    bin_edges: Vec<Vec<f64>>,
    trees: Vec<TreeDoc>,
    training_mse: Vec<f64>,
}

fn tree_to_doc(tree: &Tree) -> TreeDoc {
    let mut doc = TreeDoc {
        mode: tree.mode,
        features: Vec::with_capacity(tree.nodes.len()),
        thresholds: Vec::with_capacity(tree.nodes.len()),
        lefts: Vec::with_capacity(tree.nodes.len()),
        rights: Vec::with_capacity(tree.nodes.len()),
        values: Vec::with_capacity(tree.nodes.len()),
    };
    for node in &tree.nodes {
        match node {
            TreeNode::Internal { feature, threshold, left, right } => {
                doc.features.push(*feature as i64);
                doc.thresholds.push(*threshold);
                doc.lefts.push(*left);
                doc.rights.push(*right);
                doc.values.push(0.0);
            }
            TreeNode::Leaf { value } => {
                doc.features.push(-1);
                doc.thresholds.push(0.0);
                doc.lefts.push(0);
                doc.rights.push(0);
                doc.values.push(*value);
            }
        }
    }
    doc
}

fn tree_from_doc(doc: &TreeDoc, n_features: usize) -> Result<Tree, GbdtError> {
    let n = doc.features.len();
    if [doc.thresholds.len(), doc.lefts.len(), doc.rights.len(), doc.values.len()]
        .iter()
        .any(|&l| l != n)
    {
        return Err(GbdtError::BadDocument("tree arrays have unequal lengths".into()));
    }
    if n == 0 {
        return Err(GbdtError::BadDocument("tree has no nodes".into()));
    }
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        if doc.features[i] < 0 {
            if !doc.values[i].is_finite() {
                return Err(GbdtError::BadDocument(format!("leaf {i} is not finite")));
            }
            nodes.push(TreeNode::Leaf { value: doc.values[i] });
        } else {
            let feature = doc.features[i] as usize;
            if feature >= n_features {
                return Err(GbdtError::BadDocument(format!("node {i} feature out of range")));
            }
            if doc.lefts[i] as usize >= n || doc.rights[i] as usize >= n {
                return Err(GbdtError::BadDocument(format!("node {i} child out of range")));
            }
            nodes.push(TreeNode::Internal {
                feature,
                threshold: doc.thresholds[i],
                left: doc.lefts[i],
                right: doc.rights[i],
            });
        }
    }
    Ok(Tree { nodes, mode: doc.mode })
}

impl GbdtModel {
    /// Self-describing JSON document; round-trips bit-exactly.
    pub fn to_json(&self) -> String {
        let doc = GbdtModelDoc {
            format_version: FORMAT_VERSION,
            kind: KIND.to_string(),
            config: self.config.clone(),
            n_features: self.n_features,
            base_prediction: self.base_prediction,
            bin_edges: self.bin_edges.clone(),
            trees: self.trees.iter().map(tree_to_doc).collect(),
            training_mse: self.training_mse.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("gbdt document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GbdtError> {
        let doc: GbdtModelDoc =
            serde_json::from_str(text).map_err(|e| GbdtError::BadDocument(e.to_string()))?;
        if doc.kind != KIND {
            return Err(GbdtError::BadDocument(format!("kind `{}` is not `{KIND}`", doc.kind)));
        }
        if doc.format_version != FORMAT_VERSION {
            return Err(GbdtError::BadDocument(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        let trees = doc
            .trees
            .iter()
            .map(|t| tree_from_doc(t, doc.n_features))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GbdtModel {
            config: doc.config,
            n_features: doc.n_features,
            base_prediction: doc.base_prediction,
            trees,
            bin_edges: doc.bin_edges,
            training_mse: doc.training_mse,
        })
    }
}
