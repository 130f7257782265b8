/// A feature column discretized onto quantile bin edges.
///
/// `edges` are bin upper edges, strictly increasing. A value lands in
/// `bin = #{edges e : e < value}`, so `value <= edges[j]` iff `bin <= j`,
/// matching the split routing convention (value equal to a threshold goes
/// left).
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedFeature {
    pub edges: Vec<f64>,
    pub bins: Vec<u16>,
}

impl BinnedFeature {
    /// Number of bins, `edges.len() + 1`.
    pub fn n_bins(&self) -> usize {
        self.edges.len() + 1
    }
}

/// Place at most `n_bins - 1` strictly increasing edges at empirical
/// quantiles of `column`. Duplicate quantiles collapse; an edge equal to the
/// column maximum is dropped since nothing would route right of it. A
/// constant column therefore yields zero edges and is unsplittable.
pub fn compute_bin_edges(column: &[f64], n_bins: usize) -> Vec<f64> {
    assert!(!column.is_empty(), "column must be non-empty");
    assert!(n_bins >= 2, "need at least two bins");
    let mut sorted = column.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let max = sorted[n - 1];

    let mut edges = Vec::with_capacity(n_bins - 1);
    for k in 1..n_bins {
        // ceil(k * n / n_bins) - 1: last index of the k-th quantile block.
        let idx = (k * n).div_ceil(n_bins) - 1;
        let edge = sorted[idx];
        if edge >= max {
            break;
        }
        if edges.last() != Some(&edge) {
            edges.push(edge);
        }
    }
    edges
}

/// Bin index for one value: the count of edges strictly below it.
pub fn bin_value(x: f64, edges: &[f64]) -> u16 {
    edges.partition_point(|&e| e < x) as u16
}

/// Bin a full column.
pub fn bin_feature(column: &[f64], n_bins: usize) -> BinnedFeature {
    let edges = compute_bin_edges(column, n_bins);
    let bins = column.iter().map(|&x| bin_value(x, &edges)).collect();
    BinnedFeature { edges, bins }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_count_bins_on_uniform_sequence() {
        let column: Vec<f64> = (1..=8).map(f64::from).collect();
        let edges = compute_bin_edges(&column, 4);
        assert_eq!(edges, vec![2.0, 4.0, 6.0]);
        // Four bins of two samples each.
        let binned = bin_feature(&column, 4);
        assert_eq!(binned.bins, vec![0, 0, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn constant_column_is_unsplittable() {
        let edges = compute_bin_edges(&[7.0, 7.0, 7.0], 4);
        assert!(edges.is_empty());
    }

    #[test]
    fn duplicate_quantiles_collapse() {
        let edges = compute_bin_edges(&[1.0, 1.0, 1.0, 9.0], 4);
        assert!(edges.len() < 3);
        assert_eq!(edges, vec![1.0]);
    }

    #[test]
    fn boundary_value_routes_to_lower_bin() {
        let edges = vec![2.0, 4.0];
        assert_eq!(bin_value(2.0, &edges), 0);
        assert_eq!(bin_value(2.0000001, &edges), 1);
        assert_eq!(bin_value(4.0, &edges), 1);
        assert_eq!(bin_value(5.0, &edges), 2);
    }

    #[test]
    fn edges_strictly_increasing_on_random_data() {
        let mut rng = crate::seeding::seeded_rng(3);
        use rand::Rng;
        let column: Vec<f64> = (0..500).map(|_| rng.gen_range(-5.0f64..5.0).round()).collect();
        let edges = compute_bin_edges(&column, 16);
        assert!(edges.windows(2).all(|w| w[0] < w[1]));
        assert!(edges.len() <= 15);
    }
}
