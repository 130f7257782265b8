use rayon::prelude::*;

use super::binning::BinnedFeature;
use super::bundle::FeatureBundle;

/// Accumulated gradient/hessian statistics for one bin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HistBin {
    pub grad_sum: f64,
    pub hess_sum: f64,
    pub count: u64,
}

impl HistBin {
    pub fn add(&mut self, grad: f64, hess: f64) {
        self.grad_sum += grad;
        self.hess_sum += hess;
        self.count += 1;
    }
}

/// Histogram of one feature over one node's samples.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureHistogram {
    pub bins: Vec<HistBin>,
}

/// Build per-feature histograms over the node's samples.
///
/// `gradients`, `hessians` and `sample_weights` are full-length arrays;
/// `node_samples` selects (and orders) the rows. Weighted contributions are
/// `w_i * g_i` and `w_i * h_i`, accumulated in ascending sample order.
/// Features are processed in parallel but each feature's accumulation is
/// sequential, so results are independent of worker count.
pub fn build_histograms(
    binned: &[BinnedFeature],
    gradients: &[f64],
    hessians: &[f64],
    sample_weights: &[f64],
    node_samples: &[u32],
) -> Vec<FeatureHistogram> {
    binned
        .par_iter()
        .map(|feature| {
            let mut bins = vec![HistBin::default(); feature.n_bins()];
            for &i in node_samples {
                let i = i as usize;
                let w = sample_weights[i];
                bins[feature.bins[i] as usize].add(w * gradients[i], w * hessians[i]);
            }
            FeatureHistogram { bins }
        })
        .collect()
}

/// Bundle-column histograms: one pass per bundle instead of one per feature.
/// Nonzero member bins accumulate exactly the same additions in the same
/// order as the per-feature path, so extracted member statistics are
/// bit-identical to [`build_histograms`] output.
pub(crate) fn build_bundle_histograms(
    bundle_cols: &[Vec<u32>],
    bundles: &[FeatureBundle],
    gradients: &[f64],
    hessians: &[f64],
    sample_weights: &[f64],
    node_samples: &[u32],
) -> Vec<Vec<HistBin>> {
    bundle_cols
        .par_iter()
        .zip(bundles.par_iter())
        .map(|(col, bundle)| {
            let mut bins = vec![HistBin::default(); bundle.n_bins as usize];
            for &i in node_samples {
                let i = i as usize;
                let w = sample_weights[i];
                bins[col[i] as usize].add(w * gradients[i], w * hessians[i]);
            }
            bins
        })
        .collect()
}
