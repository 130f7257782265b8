use ndarray::Array2;

use super::network::{lstm_backward, lstm_forward};
use super::params::LstmParams;
use super::LstmError;

/// Squared-error loss on the final-step prediction plus its analytic
/// parameter gradients: `L = 0.5 * (yhat_T - target)^2`.
pub fn loss_and_grads(
    params: &LstmParams,
    sequence: &Array2<f64>,
    target: f64,
) -> Result<(f64, LstmParams), LstmError> {
    let (preds, cache) = lstm_forward(params, sequence)?;
    let t = preds.nrows();
    let err = preds[[t - 1, 0]] - target;
    let loss = 0.5 * err * err;
    let mut grad_preds = Array2::zeros((t, preds.ncols()));
    grad_preds[[t - 1, 0]] = err;
    let grads = lstm_backward(params, &cache, &grad_preds)?;
    Ok((loss, grads))
}

fn loss_only(params: &LstmParams, sequence: &Array2<f64>, target: f64) -> f64 {
    let (preds, _) = lstm_forward(params, sequence).expect("shapes fixed during gradcheck");
    let t = preds.nrows();
    let err = preds[[t - 1, 0]] - target;
    0.5 * err * err
}

/// Compare a supplied gradient against central finite differences
/// `(L(θ+eps) - L(θ-eps)) / (2 eps)` for every parameter entry; returns the
/// maximum relative discrepancy `|analytic - fd| / (|analytic| + 1e-8)`.
pub fn finite_diff_max_rel_error(
    params: &LstmParams,
    sequence: &Array2<f64>,
    target: f64,
    eps: f64,
    analytic: &LstmParams,
) -> f64 {
    assert!(eps > 0.0, "eps must be positive");
    let analytic_flat = analytic.to_flat();
    let mut flat = params.to_flat();
    let mut work = params.clone();
    let mut max_rel: f64 = 0.0;
    for k in 0..flat.len() {
        let original = flat[k];
        flat[k] = original + eps;
        work.assign_from_flat(&flat);
        let loss_plus = loss_only(&work, sequence, target);
        flat[k] = original - eps;
        work.assign_from_flat(&flat);
        let loss_minus = loss_only(&work, sequence, target);
        flat[k] = original;

        let fd = (loss_plus - loss_minus) / (2.0 * eps);
        let rel = (analytic_flat[k] - fd).abs() / (analytic_flat[k].abs() + 1e-8);
        max_rel = max_rel.max(rel);
    }
    max_rel
}

/// Gradient-correctness oracle: analytic backpropagation versus central
/// finite differences on every parameter.
///
/// `eps = 1e-5` is the 64-bit operating point; much smaller steps degrade
/// through floating-point cancellation rather than truncation error.
pub fn finite_diff_gradcheck(
    params: &LstmParams,
    sequence: &Array2<f64>,
    target: f64,
    eps: f64,
) -> f64 {
    let (_, grads) = loss_and_grads(params, sequence, target).expect("gradcheck forward");
    finite_diff_max_rel_error(params, sequence, target, eps, &grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::params::init_params;
    use crate::seeding::seeded_rng;
    use rand::Rng;

    fn random_sequence(t: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = seeded_rng(seed);
        Array2::from_shape_fn((t, d), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn analytic_matches_finite_differences() {
        let params = init_params(3, 4, 1, 1, &mut seeded_rng(7));
        let seq = random_sequence(5, 3, 7);
        let err = finite_diff_gradcheck(&params, &seq, 0.4, 1e-5);
        assert!(err < 1e-5, "max rel error {err}");
    }

    #[test]
    fn two_layer_gradients_also_check_out() {
        let params = init_params(2, 3, 2, 1, &mut seeded_rng(17));
        let seq = random_sequence(6, 2, 18);
        let err = finite_diff_gradcheck(&params, &seq, -0.2, 1e-5);
        assert!(err < 1e-5, "max rel error {err}");
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let params = init_params(3, 4, 1, 1, &mut seeded_rng(7));
        let seq = random_sequence(5, 3, 7);
        let (_, mut grads) = loss_and_grads(&params, &seq, 0.4).unwrap();
        grads.layers[0].forget.w[[0, 0]] += 0.5;
        let err = finite_diff_max_rel_error(&params, &seq, 0.4, 1e-5, &grads);
        assert!(err > 1e-2, "corruption slipped through: {err}");
    }
}
