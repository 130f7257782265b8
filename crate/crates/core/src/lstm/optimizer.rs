use super::params::LstmParams;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

/// First/second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        Self { m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }
}

/// Scale the gradient vector so its global L2 norm is at most `max_norm`.
/// Returns the pre-clip norm.
pub fn clip_global_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= scale;
        }
    }
    norm
}

/// One adaptive-moment update with bias correction on flat vectors.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, learning_rate: f64) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    state.t += 1;
    let bc1 = 1.0 - BETA1.powi(state.t as i32);
    let bc2 = 1.0 - BETA2.powi(state.t as i32);
    for k in 0..params.len() {
        state.m[k] = BETA1 * state.m[k] + (1.0 - BETA1) * grads[k];
        state.v[k] = BETA2 * state.v[k] + (1.0 - BETA2) * grads[k] * grads[k];
        let m_hat = state.m[k] / bc1;
        let v_hat = state.v[k] / bc2;
        params[k] -= learning_rate * m_hat / (v_hat.sqrt() + EPS);
    }
}

/// Clip, then Adam-update structured parameters in place.
pub fn adam_step_params(
    params: &mut LstmParams,
    grads: &LstmParams,
    state: &mut AdamState,
    learning_rate: f64,
    clip_norm: f64,
) {
    let mut flat_params = params.to_flat();
    let mut flat_grads = grads.to_flat();
    clip_global_norm(&mut flat_grads, clip_norm);
    adam_step(&mut flat_params, &flat_grads, state, learning_rate);
    params.assign_from_flat(&flat_params);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradients_leave_params_unchanged() {
        let mut params = vec![1.0, -2.0, 3.0];
        let mut state = AdamState::new(3);
        adam_step(&mut params, &[0.0; 3], &mut state, 0.1);
        assert_eq!(params, vec![1.0, -2.0, 3.0]);
        // Pre-existing moments decay on a zero-gradient step.
        state.m = vec![0.5, 0.5, 0.5];
        state.v = vec![0.1, 0.1, 0.1];
        adam_step(&mut params, &[0.0; 3], &mut state, 0.1);
        assert!((state.m[0] - 0.45).abs() < 1e-15);
        assert!((state.v[0] - 0.0999).abs() < 1e-15);
    }

    #[test]
    fn first_step_moves_by_learning_rate_sign() {
        // With bias correction, step 1 moves each coordinate by
        // lr * g / (|g| + eps'), essentially lr * sign(g).
        let mut params = vec![0.0, 0.0];
        let mut state = AdamState::new(2);
        adam_step(&mut params, &[0.3, -7.0], &mut state, 0.01);
        assert!((params[0] + 0.01).abs() < 1e-6);
        assert!((params[1] - 0.01).abs() < 1e-6);
    }

    #[test]
    fn clipping_rescales_to_max_norm() {
        let mut grads = vec![6.0, 8.0]; // norm 10
        let norm = clip_global_norm(&mut grads, 1.0);
        assert_eq!(norm, 10.0);
        assert!((grads[0] - 0.6).abs() < 1e-15);
        assert!((grads[1] - 0.8).abs() < 1e-15);
        let mut small = vec![0.3, 0.4];
        clip_global_norm(&mut small, 1.0);
        assert_eq!(small, vec![0.3, 0.4]);
    }
}
