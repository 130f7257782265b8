use rand_chacha::ChaCha8Rng;

use super::config::GossConfig;
use super::GbdtError;

/// Gradient-based one-side sampling.
///
/// Keeps the top `ceil(a*n)` samples by |gradient| at weight 1, plus
/// `ceil(b*n)` uniform draws (without replacement) from the remainder at
/// weight `(1-a)/b`. Returns ascending sample indices with aligned weights.
pub fn goss_sample(
    gradients: &[f64],
    config: &GossConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<u32>, Vec<f64>), GbdtError> {
    config.validate()?;
    let n = gradients.len();
    let top_k = (config.top_rate * n as f64).ceil() as usize;
    let other_k = (config.other_rate * n as f64).ceil() as usize;
    if top_k + other_k > n {
        return Err(GbdtError::SampleBudgetExceedsData { top: top_k, other: other_k, n });
    }

    // Sort by |gradient| descending; equal magnitudes favour the lower index
    // so the ordering is deterministic.
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        gradients[b as usize]
            .abs()
            .total_cmp(&gradients[a as usize].abs())
            .then(a.cmp(&b))
    });

    let amplification = config.amplification();
    let mut picked: Vec<(u32, f64)> = order[..top_k].iter().map(|&i| (i, 1.0)).collect();
    let remainder = &order[top_k..];
    for pos in rand::seq::index::sample(rng, remainder.len(), other_k) {
        picked.push((remainder[pos], amplification));
    }
    picked.sort_unstable_by_key(|&(i, _)| i);

    let indices = picked.iter().map(|&(i, _)| i).collect();
    let weights = picked.iter().map(|&(_, w)| w).collect();
    Ok((indices, weights))
}
