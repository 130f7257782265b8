use super::histogram::{FeatureHistogram, HistBin};

/// Gradient/hessian/count totals for one node's samples.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeStats {
    pub grad_sum: f64,
    pub hess_sum: f64,
    pub count: u64,
}

/// Regularization knobs consulted during split search.
#[derive(Debug, Clone, Copy)]
pub struct SplitParams {
    pub lambda: f64,
    pub gamma: f64,
    pub min_samples_leaf: u64,
}

/// A candidate (feature, threshold) with its gain and child statistics.
#[derive(Debug, Clone, Copy)]
pub struct SplitCandidate {
    pub feature: usize,
    pub edge_index: usize,
    pub threshold: f64,
    pub gain: f64,
    pub left: NodeStats,
    pub right: NodeStats,
}

#[inline]
fn score(grad: f64, hess: f64, lambda: f64) -> f64 {
    let denom = hess + lambda;
    if denom <= 0.0 {
        0.0
    } else {
        grad * grad / denom
    }
}

/// Split gain: `0.5 * [G_L²/(H_L+λ) + G_R²/(H_R+λ) − G_P²/(H_P+λ)] − γ`.
pub(crate) fn split_gain(left: NodeStats, right: NodeStats, parent: NodeStats, params: &SplitParams) -> f64 {
    0.5 * (score(left.grad_sum, left.hess_sum, params.lambda)
        + score(right.grad_sum, right.hess_sum, params.lambda)
        - score(parent.grad_sum, parent.hess_sum, params.lambda))
        - params.gamma
}

/// Newton-step leaf value `-G / (H + λ)`.
pub(crate) fn leaf_value(stats: NodeStats, lambda: f64) -> f64 {
    let denom = stats.hess_sum + lambda;
    if denom <= 0.0 {
        0.0
    } else {
        -stats.grad_sum / denom
    }
}

/// Scan one feature's candidate edges left to right.
///
/// `nonzero[k]` holds the statistics of bin `k+1`; bin 0 never appears on
/// the right side of a split, so right-hand sums are suffix sums over
/// `nonzero` and left-hand sums follow by subtraction from the parent. The
/// exact same additions happen whether the statistics came from a raw
/// feature histogram or were sliced out of a bundle histogram, which keeps
/// bundled and unbundled training bit-identical.
pub(crate) fn scan_feature(
    feature: usize,
    nonzero: &[HistBin],
    edges: &[f64],
    parent: NodeStats,
    params: &SplitParams,
) -> Option<SplitCandidate> {
    let n_edges = edges.len();
    debug_assert_eq!(nonzero.len(), n_edges);
    if n_edges == 0 {
        return None;
    }

    // suffix[j] = stats of bins > j.
    let mut suffix = vec![NodeStats::default(); n_edges];
    let mut acc = NodeStats::default();
    for k in (0..n_edges).rev() {
        acc.grad_sum += nonzero[k].grad_sum;
        acc.hess_sum += nonzero[k].hess_sum;
        acc.count += nonzero[k].count;
        suffix[k] = acc;
    }

    let mut best: Option<SplitCandidate> = None;
    let mut best_gain = 0.0;
    for j in 0..n_edges {
        let right = suffix[j];
        if right.count == 0 || right.count >= parent.count {
            continue;
        }
        let left = NodeStats {
            grad_sum: parent.grad_sum - right.grad_sum,
            hess_sum: parent.hess_sum - right.hess_sum,
            count: parent.count - right.count,
        };
        if left.count < params.min_samples_leaf || right.count < params.min_samples_leaf {
            continue;
        }
        let gain = split_gain(left, right, parent, params);
        if gain > best_gain {
            best_gain = gain;
            best = Some(SplitCandidate {
                feature,
                edge_index: j,
                threshold: edges[j],
                gain,
                left,
                right,
            });
        }
    }
    best
}

/// Best split across all features of a node.
///
/// Returns `None` when no candidate has positive gain or every candidate
/// violates `min_samples_leaf`. Ties break to the lowest feature index, then
/// the lowest threshold, because scanning is in ascending order and only a
/// strictly greater gain replaces the incumbent.
pub fn best_split(
    histograms: &[FeatureHistogram],
    edges: &[Vec<f64>],
    parent: NodeStats,
    params: &SplitParams,
) -> Option<SplitCandidate> {
    let mut best: Option<SplitCandidate> = None;
    for (f, (hist, feature_edges)) in histograms.iter().zip(edges).enumerate() {
        if feature_edges.is_empty() {
            continue;
        }
        let candidate = scan_feature(f, &hist.bins[1..], feature_edges, parent, params);
        if let Some(c) = candidate {
            if best.map_or(true, |b| c.gain > b.gain) {
                best = Some(c);
            }
        }
    }
    best
}
