use super::binning::BinnedFeature;

/// One feature's slot inside a bundle: its nonzero bins `1..=n_edges` map to
/// bundle bins `offset+1 ..= offset+n_edges`, so the original bin is always
/// recoverable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleMember {
    pub feature: usize,
    pub offset: u32,
    pub n_edges: usize,
}

/// A group of mutually (near-)exclusive features sharing one histogram
/// column. Bundle bin 0 means "every member absent".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureBundle {
    pub members: Vec<BundleMember>,
    /// Total bundle bins including the shared zero bin.
    pub n_bins: u32,
}

impl FeatureBundle {
    fn new() -> Self {
        Self { members: Vec::new(), n_bins: 1 }
    }

    fn push_member(&mut self, feature: usize, n_edges: usize) {
        let offset = self.n_bins - 1;
        self.members.push(BundleMember { feature, offset, n_edges });
        self.n_bins += n_edges as u32;
    }
}

/// Rows on which both features are nonzero (bin != 0).
fn conflict_count(a: &BinnedFeature, b: &BinnedFeature) -> usize {
    a.bins
        .iter()
        .zip(&b.bins)
        .filter(|(&x, &y)| x != 0 && y != 0)
        .count()
}

/// Greedy exclusive feature bundling.
///
/// Features are ordered by nonzero count descending (ties by index) and each
/// is assigned to the first bundle where its pairwise conflict with every
/// member stays within `conflict_budget`; otherwise it opens a new bundle.
pub fn efb_bundle(binned: &[BinnedFeature], conflict_budget: usize) -> Vec<FeatureBundle> {
    let mut order: Vec<usize> = (0..binned.len()).collect();
    let nonzero_counts: Vec<usize> = binned
        .iter()
        .map(|f| f.bins.iter().filter(|&&b| b != 0).count())
        .collect();
    order.sort_by_key(|&f| (std::cmp::Reverse(nonzero_counts[f]), f));

    let mut bundles: Vec<FeatureBundle> = Vec::new();
    for f in order {
        let fits = bundles.iter().position(|bundle| {
            bundle
                .members
                .iter()
                .all(|m| conflict_count(&binned[f], &binned[m.feature]) <= conflict_budget)
        });
        let slot = match fits {
            Some(i) => i,
            None => {
                bundles.push(FeatureBundle::new());
                bundles.len() - 1
            }
        };
        bundles[slot].push_member(f, binned[f].edges.len());
    }
    bundles
}

/// One bundle per feature, offset zero: the identity packing used when EFB
/// is disabled. Training on singleton bundles is bit-identical to training
/// on raw binned features.
pub fn singleton_bundles(binned: &[BinnedFeature]) -> Vec<FeatureBundle> {
    binned
        .iter()
        .enumerate()
        .map(|(f, feat)| {
            let mut bundle = FeatureBundle::new();
            bundle.push_member(f, feat.edges.len());
            bundle
        })
        .collect()
}

/// Where one original feature lives: which bundle, at what bin offset.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FeatureLocation {
    pub bundle: usize,
    pub offset: u32,
    pub n_edges: usize,
}

pub(crate) fn feature_locations(bundles: &[FeatureBundle], n_features: usize) -> Vec<FeatureLocation> {
    let mut locs = vec![
        FeatureLocation { bundle: usize::MAX, offset: 0, n_edges: 0 };
        n_features
    ];
    for (b, bundle) in bundles.iter().enumerate() {
        for m in &bundle.members {
            locs[m.feature] = FeatureLocation {
                bundle: b,
                offset: m.offset,
                n_edges: m.n_edges,
            };
        }
    }
    locs
}

/// Pack binned features into per-bundle columns. With conflicting rows
/// (allowed when the budget is positive) the member listed last wins.
pub(crate) fn build_bundle_columns(
    binned: &[BinnedFeature],
    bundles: &[FeatureBundle],
    n_rows: usize,
) -> Vec<Vec<u32>> {
    bundles
        .iter()
        .map(|bundle| {
            let mut col = vec![0u32; n_rows];
            for m in &bundle.members {
                let bins = &binned[m.feature].bins;
                for (i, &b) in bins.iter().enumerate() {
                    if b != 0 {
                        col[i] = m.offset + b as u32;
                    }
                }
            }
            col
        })
        .collect()
}
