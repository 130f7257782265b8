use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::binning::BinnedFeature;
use super::bundle::{
    build_bundle_columns, efb_bundle, feature_locations, singleton_bundles, FeatureBundle,
    FeatureLocation,
};
use super::config::{BoostConfig, TreeMode};
use super::histogram::{build_bundle_histograms, HistBin};
use super::split::{leaf_value, scan_feature, split_gain, NodeStats, SplitCandidate, SplitParams};

/// One node of a fitted regression tree. Routing: `value <= threshold` goes
/// left.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

/// A fitted regression tree (unscaled; the model applies the learning rate).
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
    pub mode: TreeMode,
}

impl Tree {
    pub fn single_leaf(value: f64, mode: TreeMode) -> Self {
        Self { nodes: vec![TreeNode::Leaf { value }], mode }
    }

    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Internal { feature, threshold, left, right } => {
                    idx = if row[*feature] <= *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    /// True when all internal nodes at equal depth share one
    /// (feature, threshold) — the oblivious-tree structural invariant.
    pub fn is_oblivious_structured(&self) -> bool {
        let mut level: Vec<usize> = vec![0];
        while !level.is_empty() {
            let mut shared: Option<(usize, u64)> = None;
            let mut next = Vec::new();
            for &idx in &level {
                if let TreeNode::Internal { feature, threshold, left, right } = &self.nodes[idx] {
                    let key = (*feature, threshold.to_bits());
                    match shared {
                        None => shared = Some(key),
                        Some(k) if k != key => return false,
                        _ => {}
                    }
                    next.push(*left as usize);
                    next.push(*right as usize);
                }
            }
            level = next;
        }
        true
    }
}

/// Everything tree growth needs about the (possibly GOSS-reduced,
/// possibly bundled) training data.
pub(crate) struct TrainView<'a> {
    pub binned: &'a [BinnedFeature],
    pub bundles: &'a [FeatureBundle],
    pub bundle_cols: &'a [Vec<u32>],
    pub locs: &'a [FeatureLocation],
    pub gradients: &'a [f64],
    pub hessians: &'a [f64],
    pub weights: &'a [f64],
    pub params: SplitParams,
}

impl<'a> TrainView<'a> {
    fn n_features(&self) -> usize {
        self.binned.len()
    }

    /// Weighted gradient/hessian totals in ascending sample order.
    fn node_stats(&self, samples: &[u32]) -> NodeStats {
        let mut stats = NodeStats::default();
        for &i in samples {
            let i = i as usize;
            let w = self.weights[i];
            stats.grad_sum += w * self.gradients[i];
            stats.hess_sum += w * self.hessians[i];
            stats.count += 1;
        }
        stats
    }

    /// Decode a feature's bin for one row from its bundle column.
    fn feature_bin(&self, feature: usize, row: usize) -> u16 {
        let loc = self.locs[feature];
        let v = self.bundle_cols[loc.bundle][row];
        if v > loc.offset && v <= loc.offset + loc.n_edges as u32 {
            (v - loc.offset) as u16
        } else {
            0
        }
    }

    fn bundle_histograms(&self, samples: &[u32]) -> Vec<Vec<HistBin>> {
        build_bundle_histograms(
            self.bundle_cols,
            self.bundles,
            self.gradients,
            self.hessians,
            self.weights,
            samples,
        )
    }

    /// Per-feature nonzero-bin slice out of the bundle histograms.
    fn nonzero_slice<'h>(&self, hists: &'h [Vec<HistBin>], feature: usize) -> &'h [HistBin] {
        let loc = self.locs[feature];
        let lo = loc.offset as usize + 1;
        &hists[loc.bundle][lo..lo + loc.n_edges]
    }

    /// Best candidate over all features, scanned in ascending feature order.
    fn best_candidate(&self, samples: &[u32], stats: NodeStats) -> Option<SplitCandidate> {
        let hists = self.bundle_histograms(samples);
        let mut best: Option<SplitCandidate> = None;
        for f in 0..self.n_features() {
            if self.locs[f].n_edges == 0 {
                continue;
            }
            let cand = scan_feature(
                f,
                self.nonzero_slice(&hists, f),
                &self.binned[f].edges,
                stats,
                &self.params,
            );
            if let Some(c) = cand {
                if best.map_or(true, |b| c.gain > b.gain) {
                    best = Some(c);
                }
            }
        }
        best
    }

    /// Stable partition by `bin <= edge_index`; both sides stay ascending.
    fn partition(&self, samples: &[u32], feature: usize, edge_index: usize) -> (Vec<u32>, Vec<u32>) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &i in samples {
            if (self.feature_bin(feature, i as usize) as usize) <= edge_index {
                left.push(i);
            } else {
                right.push(i);
            }
        }
        (left, right)
    }
}

struct PendingSplit {
    cand: SplitCandidate,
    slot: u32,
    samples: Vec<u32>,
}

impl PartialEq for PendingSplit {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for PendingSplit {}
impl PartialOrd for PendingSplit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PendingSplit {
    fn cmp(&self, other: &Self) -> Ordering {
        // Highest gain first; equal gains favour the earlier-created leaf.
        self.cand
            .gain
            .total_cmp(&other.cand.gain)
            .then_with(|| other.slot.cmp(&self.slot))
    }
}

pub(crate) fn grow_leafwise_view(view: &TrainView, root_samples: Vec<u32>, max_leaves: usize) -> Tree {
    let lambda = view.params.lambda;
    let root_stats = view.node_stats(&root_samples);
    let mut nodes = vec![TreeNode::Leaf { value: leaf_value(root_stats, lambda) }];
    if max_leaves <= 1 {
        return Tree { nodes, mode: TreeMode::Leafwise };
    }

    let mut heap = BinaryHeap::new();
    if let Some(cand) = view.best_candidate(&root_samples, root_stats) {
        heap.push(PendingSplit { cand, slot: 0, samples: root_samples });
    }

    let mut n_leaves = 1;
    while n_leaves < max_leaves {
        let Some(pending) = heap.pop() else { break };
        let (left_samples, right_samples) =
            view.partition(&pending.samples, pending.cand.feature, pending.cand.edge_index);
        debug_assert_eq!(left_samples.len() as u64, pending.cand.left.count);
        debug_assert_eq!(right_samples.len() as u64, pending.cand.right.count);

        let left_stats = view.node_stats(&left_samples);
        let right_stats = view.node_stats(&right_samples);
        let left_slot = nodes.len() as u32;
        nodes.push(TreeNode::Leaf { value: leaf_value(left_stats, lambda) });
        let right_slot = nodes.len() as u32;
        nodes.push(TreeNode::Leaf { value: leaf_value(right_stats, lambda) });
        nodes[pending.slot as usize] = TreeNode::Internal {
            feature: pending.cand.feature,
            threshold: pending.cand.threshold,
            left: left_slot,
            right: right_slot,
        };
        n_leaves += 1;
        if n_leaves >= max_leaves {
            break;
        }
        if let Some(cand) = view.best_candidate(&left_samples, left_stats) {
            heap.push(PendingSplit { cand, slot: left_slot, samples: left_samples });
        }
        if let Some(cand) = view.best_candidate(&right_samples, right_stats) {
            heap.push(PendingSplit { cand, slot: right_slot, samples: right_samples });
        }
    }
    Tree { nodes, mode: TreeMode::Leafwise }
}

pub(crate) fn grow_oblivious_view(view: &TrainView, root_samples: Vec<u32>, depth: usize) -> Tree {
    let lambda = view.params.lambda;
    let gamma = view.params.gamma;
    let min_leaf = view.params.min_samples_leaf;
    let raw_params = SplitParams { lambda, gamma: 0.0, min_samples_leaf: min_leaf };

    let root_stats = view.node_stats(&root_samples);
    let mut level: Vec<(Vec<u32>, NodeStats)> = vec![(root_samples, root_stats)];
    let mut level_splits: Vec<(usize, f64, usize)> = Vec::new();

    for _ in 0..depth {
        let hists: Vec<Vec<Vec<HistBin>>> =
            level.iter().map(|(samples, _)| view.bundle_histograms(samples)).collect();

        let mut best: Option<(f64, usize, usize)> = None;
        let mut best_gain = 0.0;
        for f in 0..view.n_features() {
            let n_edges = view.locs[f].n_edges;
            if n_edges == 0 {
                continue;
            }
            // Per-node suffix stats for this feature: suffix[node][j] covers
            // bins > j, the right side of candidate edge j.
            let suffixes: Vec<Vec<NodeStats>> = hists
                .iter()
                .map(|h| {
                    let nonzero = view.nonzero_slice(h, f);
                    let mut acc = NodeStats::default();
                    let mut suffix = vec![NodeStats::default(); n_edges];
                    for k in (0..n_edges).rev() {
                        acc.grad_sum += nonzero[k].grad_sum;
                        acc.hess_sum += nonzero[k].hess_sum;
                        acc.count += nonzero[k].count;
                        suffix[k] = acc;
                    }
                    suffix
                })
                .collect();

            for j in 0..n_edges {
                let mut total = 0.0;
                let mut feasible = true;
                for (node_idx, (_, stats)) in level.iter().enumerate() {
                    let right = suffixes[node_idx][j];
                    if right.count == 0 || right.count == stats.count {
                        // Candidate passes this node through unchanged.
                        continue;
                    }
                    let left = NodeStats {
                        grad_sum: stats.grad_sum - right.grad_sum,
                        hess_sum: stats.hess_sum - right.hess_sum,
                        count: stats.count - right.count,
                    };
                    if left.count < min_leaf || right.count < min_leaf {
                        feasible = false;
                        break;
                    }
                    total += split_gain(left, right, *stats, &raw_params);
                }
                if !feasible {
                    continue;
                }
                // One shared split adds a leaf per current node.
                total -= gamma * level.len() as f64;
                if total > best_gain {
                    best_gain = total;
                    best = Some((total, f, j));
                }
            }
        }

        let Some((_, feature, edge_index)) = best else { break };
        let threshold = view.binned[feature].edges[edge_index];
        level_splits.push((feature, threshold, edge_index));
        let mut next = Vec::with_capacity(level.len() * 2);
        for (samples, _) in &level {
            let (ls, rs) = view.partition(samples, feature, edge_index);
            let lstats = view.node_stats(&ls);
            let rstats = view.node_stats(&rs);
            next.push((ls, lstats));
            next.push((rs, rstats));
        }
        level = next;
    }

    assemble_oblivious(&level_splits, &level, lambda)
}

/// Build the perfect binary tree in heap layout: node `i` has children
/// `2i+1` and `2i+2`; leaves of a depth-`d` tree sit at `2^d - 1 ..`.
fn assemble_oblivious(
    splits: &[(usize, f64, usize)],
    leaves: &[(Vec<u32>, NodeStats)],
    lambda: f64,
) -> Tree {
    let d = splits.len();
    if d == 0 {
        let (_, stats) = leaves[0];
        return Tree::single_leaf(leaf_value(stats, lambda), TreeMode::Oblivious);
    }
    debug_assert_eq!(leaves.len(), 1 << d);
    let mut nodes = Vec::with_capacity((1 << (d + 1)) - 1);
    for l in 0..d {
        let (feature, threshold, _) = splits[l];
        for p in 0..(1usize << l) {
            let idx = ((1 << l) - 1 + p) as u32;
            nodes.push(TreeNode::Internal {
                feature,
                threshold,
                left: 2 * idx + 1,
                right: 2 * idx + 2,
            });
        }
    }
    for (_, stats) in leaves {
        let value = if stats.count == 0 { 0.0 } else { leaf_value(*stats, lambda) };
        nodes.push(TreeNode::Leaf { value });
    }
    Tree { nodes, mode: TreeMode::Oblivious }
}

fn make_view<'a>(
    binned: &'a [BinnedFeature],
    bundles: &'a [FeatureBundle],
    bundle_cols: &'a [Vec<u32>],
    locs: &'a [FeatureLocation],
    gradients: &'a [f64],
    hessians: &'a [f64],
    weights: &'a [f64],
    config: &BoostConfig,
) -> TrainView<'a> {
    TrainView {
        binned,
        bundles,
        bundle_cols,
        locs,
        gradients,
        hessians,
        weights,
        params: SplitParams {
            lambda: config.lambda,
            gamma: config.gamma,
            min_samples_leaf: config.min_samples_leaf as u64,
        },
    }
}

fn bundling_for(binned: &[BinnedFeature], config: &BoostConfig) -> Vec<FeatureBundle> {
    match &config.efb {
        Some(efb) => efb_bundle(binned, efb.conflict_budget),
        None => singleton_bundles(binned),
    }
}

/// Best-first growth: repeatedly split the highest-gain leaf until
/// `config.max_leaves` is reached or no split has positive gain.
pub fn grow_tree_leafwise(
    binned: &[BinnedFeature],
    gradients: &[f64],
    hessians: &[f64],
    weights: &[f64],
    config: &BoostConfig,
) -> Tree {
    let n = gradients.len();
    assert!(n > 0, "data must be non-empty");
    let bundles = bundling_for(binned, config);
    let bundle_cols = build_bundle_columns(binned, &bundles, n);
    let locs = feature_locations(&bundles, binned.len());
    let view = make_view(binned, &bundles, &bundle_cols, &locs, gradients, hessians, weights, config);
    grow_leafwise_view(&view, (0..n as u32).collect(), config.max_leaves)
}

/// Level-shared growth: each level applies the single (feature, threshold)
/// maximizing the summed gain across all current nodes; a level with no
/// positive summed gain terminates growth early.
pub fn grow_tree_oblivious(
    binned: &[BinnedFeature],
    gradients: &[f64],
    hessians: &[f64],
    config: &BoostConfig,
) -> Tree {
    let n = gradients.len();
    assert!(n > 0, "data must be non-empty");
    let weights = vec![1.0; n];
    let bundles = bundling_for(binned, config);
    let bundle_cols = build_bundle_columns(binned, &bundles, n);
    let locs = feature_locations(&bundles, binned.len());
    let view = make_view(binned, &bundles, &bundle_cols, &locs, gradients, hessians, &weights, config);
    grow_oblivious_view(&view, (0..n as u32).collect(), config.depth)
}
