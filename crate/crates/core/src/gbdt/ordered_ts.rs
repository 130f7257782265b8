use std::collections::HashMap;

use rand::seq::SliceRandom;

/// Prior used for rows with no predecessors in the permutation, where no
/// running target mean exists yet.
const FIRST_ROW_PRIOR: f64 = 0.5;

/// Leakage-free categorical encoding via ordered target statistics.
///
/// `order[k]` is the row processed k-th; a row is encoded using only the
/// targets of rows earlier in `order`. For row `i` with category `c`:
///
/// `enc(i) = (sum_{earlier, cat=c} y + w * prior(i)) / (count_{earlier, cat=c} + w)`
///
/// where `prior(i)` is the running mean of all earlier targets (any
/// category) and `w` is `prior_weight`. A row's own target never feeds its
/// own encoding, so perturbing `y_i` only changes encodings of rows after
/// `i` in the permutation.
pub fn ordered_target_stats(
    categories: &[u64],
    targets: &[f64],
    prior_weight: f64,
    order: &[usize],
) -> Vec<f64> {
    let n = categories.len();
    assert_eq!(targets.len(), n, "targets must align with categories");
    assert_eq!(order.len(), n, "permutation must cover every row");
    assert!(prior_weight > 0.0, "prior_weight must be positive");
    let mut seen = vec![false; n];
    for &row in order {
        assert!(row < n && !seen[row], "order must be a bijection on row indices");
        seen[row] = true;
    }

    let mut encoded = vec![0.0; n];
    let mut global_sum = 0.0;
    let mut global_count = 0u64;
    let mut per_category: HashMap<u64, (f64, u64)> = HashMap::new();

    for &row in order {
        let prior = if global_count == 0 {
            FIRST_ROW_PRIOR
        } else {
            global_sum / global_count as f64
        };
        let (cat_sum, cat_count) = per_category
            .get(&categories[row])
            .copied()
            .unwrap_or((0.0, 0));
        encoded[row] = (cat_sum + prior_weight * prior) / (cat_count as f64 + prior_weight);

        let entry = per_category.entry(categories[row]).or_insert((0.0, 0));
        entry.0 += targets[row];
        entry.1 += 1;
        global_sum += targets[row];
        global_count += 1;
    }
    encoded
}

/// Deterministic random permutation of `0..n` drawn from `seed`.
pub fn seeded_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut crate::seeding::seeded_rng(seed));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_row_uses_prior_alone() {
        let enc = ordered_target_stats(&[3, 3, 3], &[9.0, 9.0, 9.0], 1.0, &[0, 1, 2]);
        assert_eq!(enc[0], 0.5);
    }

    #[test]
    fn second_row_blends_category_sum_and_running_mean() {
        // Identity order, same category, targets [1, 0]: the second row sees
        // category sum 1, category count 1, running mean 1.0, so
        // (1 + 1*1.0) / (1 + 1) = 1.0.
        let enc = ordered_target_stats(&[7, 7], &[1.0, 0.0], 1.0, &[0, 1]);
        assert_eq!(enc[1], 1.0);
    }

    #[test]
    fn own_target_never_leaks() {
        let categories = vec![1, 2, 1, 2, 1, 1, 2, 2];
        let targets: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let order = seeded_permutation(8, 13);
        let base = ordered_target_stats(&categories, &targets, 1.0, &order);
        let position_of: Vec<usize> = {
            let mut pos = vec![0; 8];
            for (k, &row) in order.iter().enumerate() {
                pos[row] = k;
            }
            pos
        };
        for i in 0..8 {
            let mut perturbed = targets.clone();
            perturbed[i] += 100.0;
            let enc = ordered_target_stats(&categories, &perturbed, 1.0, &order);
            assert_eq!(enc[i].to_bits(), base[i].to_bits(), "row {i} leaked its own target");
            for j in 0..8 {
                if position_of[j] < position_of[i] {
                    assert_eq!(enc[j].to_bits(), base[j].to_bits(), "earlier row {j} changed");
                }
            }
        }
    }

    #[test]
    fn perturbation_reaches_only_later_rows() {
        let categories = vec![1, 1, 1, 1];
        let targets = vec![0.0, 1.0, 2.0, 3.0];
        let order = vec![2, 0, 3, 1];
        let base = ordered_target_stats(&categories, &targets, 1.0, &order);
        let mut perturbed = targets.clone();
        perturbed[0] = 50.0; // row 0 sits at position 1
        let enc = ordered_target_stats(&categories, &perturbed, 1.0, &order);
        assert_eq!(enc[2], base[2]); // position 0: before the perturbed row
        assert_eq!(enc[0], base[0]); // the perturbed row itself
        assert_ne!(enc[3], base[3]); // positions 2 and 3 see the change
        assert_ne!(enc[1], base[1]);
    }

    #[test]
    fn seeded_permutation_is_reproducible() {
        assert_eq!(seeded_permutation(10, 4), seeded_permutation(10, 4));
        assert_ne!(seeded_permutation(10, 4), seeded_permutation(10, 5));
    }
}
