use ndarray::{Array1, Array2};

use super::params::{LayerParams, LstmParams};
use super::LstmError;

/// Recurrent state: hidden vector `h` and cell vector `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmState {
    pub h: Array1<f64>,
    pub c: Array1<f64>,
}

impl LstmState {
    pub fn zeros(hidden: usize) -> Self {
        Self { h: Array1::zeros(hidden), c: Array1::zeros(hidden) }
    }
}

/// Everything one cell step must remember for backpropagation.
#[derive(Debug, Clone)]
pub struct StepCache {
    pub x: Array1<f64>,
    pub h_prev: Array1<f64>,
    pub c_prev: Array1<f64>,
    pub f: Array1<f64>,
    pub i: Array1<f64>,
    pub c_tilde: Array1<f64>,
    pub c: Array1<f64>,
    pub o: Array1<f64>,
    pub tanh_c: Array1<f64>,
    pub h: Array1<f64>,
}

/// Per-timestep, per-layer caches plus the head outputs.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `steps[t][layer]`.
    pub steps: Vec<Vec<StepCache>>,
    /// Head output at every timestep, `T × out`.
    pub predictions: Array2<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One gated cell step:
/// `f = σ(W_f x + U_f h + b_f)`, `i = σ(W_i x + U_i h + b_i)`,
/// `c̃ = tanh(W_c x + U_c h + b_c)`, `c' = f ⊙ c + i ⊙ c̃`,
/// `o = σ(W_o x + U_o h + b_o)`, `h' = o ⊙ tanh(c')`.
pub fn lstm_cell_forward(
    layer: &LayerParams,
    x: &Array1<f64>,
    state: &LstmState,
) -> (LstmState, StepCache) {
    assert_eq!(x.len(), layer.input_size(), "input width mismatch");
    assert_eq!(state.h.len(), layer.hidden_size(), "state width mismatch");

    let pre = |g: &super::params::GateParams| g.w.dot(x) + g.u.dot(&state.h) + &g.b;
    let f = pre(&layer.forget).mapv(sigmoid);
    let i = pre(&layer.input).mapv(sigmoid);
    let c_tilde = pre(&layer.cell).mapv(f64::tanh);
    let c = &f * &state.c + &i * &c_tilde;
    let o = pre(&layer.output).mapv(sigmoid);
    let tanh_c = c.mapv(f64::tanh);
    let h = &o * &tanh_c;

    let next = LstmState { h: h.clone(), c: c.clone() };
    let cache = StepCache {
        x: x.clone(),
        h_prev: state.h.clone(),
        c_prev: state.c.clone(),
        f,
        i,
        c_tilde,
        c,
        o,
        tanh_c,
        h,
    };
    (next, cache)
}

/// Run the stack left to right from zero state and apply the linear head at
/// every timestep. Layer `l+1` consumes layer `l`'s hidden sequence.
pub fn lstm_forward(
    params: &LstmParams,
    sequence: &Array2<f64>,
) -> Result<(Array2<f64>, ForwardCache), LstmError> {
    let t_len = sequence.nrows();
    if t_len == 0 {
        return Err(LstmError::DimensionMismatch("sequence is empty".into()));
    }
    if sequence.ncols() != params.input_size() {
        return Err(LstmError::DimensionMismatch(format!(
            "sequence width {} but input size {}",
            sequence.ncols(),
            params.input_size()
        )));
    }

    let n_layers = params.n_layers();
    let out_dim = params.output_size();
    let mut states: Vec<LstmState> = params
        .layers
        .iter()
        .map(|l| LstmState::zeros(l.hidden_size()))
        .collect();

    let mut steps: Vec<Vec<StepCache>> = Vec::with_capacity(t_len);
    let mut predictions = Array2::zeros((t_len, out_dim));
    for t in 0..t_len {
        let mut x = sequence.row(t).to_owned();
        let mut layer_caches = Vec::with_capacity(n_layers);
        for (l, layer) in params.layers.iter().enumerate() {
            let (next, cache) = lstm_cell_forward(layer, &x, &states[l]);
            x = next.h.clone();
            states[l] = next;
            layer_caches.push(cache);
        }
        let y = params.head_w.dot(&x) + &params.head_b;
        predictions.row_mut(t).assign(&y);
        steps.push(layer_caches);
    }

    Ok((predictions.clone(), ForwardCache { steps, predictions }))
}

fn outer_add(target: &mut Array2<f64>, col: &Array1<f64>, row: &Array1<f64>) {
    for (r, &cv) in col.iter().enumerate() {
        if cv == 0.0 {
            continue;
        }
        let mut slice = target.row_mut(r);
        for (c, &rv) in row.iter().enumerate() {
            slice[c] += cv * rv;
        }
    }
}

/// Exact gradients of the loss with respect to every parameter, given the
/// loss gradient at each head output. Standard backpropagation through time
/// over the cached forward pass, accumulated across timesteps.
pub fn lstm_backward(
    params: &LstmParams,
    cache: &ForwardCache,
    grad_predictions: &Array2<f64>,
) -> Result<LstmParams, LstmError> {
    let t_len = cache.steps.len();
    if grad_predictions.nrows() != t_len || grad_predictions.ncols() != params.output_size() {
        return Err(LstmError::CacheMismatch(format!(
            "gradient is {}x{}, cache covers {} steps of {} outputs",
            grad_predictions.nrows(),
            grad_predictions.ncols(),
            t_len,
            params.output_size()
        )));
    }
    if t_len == 0 || cache.steps[0].len() != params.n_layers() {
        return Err(LstmError::CacheMismatch("cache layer count mismatch".into()));
    }

    let n_layers = params.n_layers();
    let mut grads = params.zeros_like();
    let mut dh_carry: Vec<Array1<f64>> = params
        .layers
        .iter()
        .map(|l| Array1::zeros(l.hidden_size()))
        .collect();
    let mut dc_carry = dh_carry.clone();

    for t in (0..t_len).rev() {
        let dy = grad_predictions.row(t).to_owned();
        let top_h = &cache.steps[t][n_layers - 1].h;
        outer_add(&mut grads.head_w, &dy, top_h);
        grads.head_b += &dy;

        // Gradient flowing into the h output of the layer below; starts as
        // the head's contribution into the top layer.
        let mut dx_above = params.head_w.t().dot(&dy);
        for l in (0..n_layers).rev() {
            let step = &cache.steps[t][l];
            let layer = &params.layers[l];

            let dh = &dx_above + &dh_carry[l];
            let d_o = &dh * &step.tanh_c;
            let dc = &dh * &step.o * step.tanh_c.mapv(|v| 1.0 - v * v) + &dc_carry[l];

            let df = &dc * &step.c_prev;
            let di = &dc * &step.c_tilde;
            let dct = &dc * &step.i;

            let da_f = df * &step.f * step.f.mapv(|v| 1.0 - v);
            let da_i = di * &step.i * step.i.mapv(|v| 1.0 - v);
            let da_c = dct * step.c_tilde.mapv(|v| 1.0 - v * v);
            let da_o = d_o * &step.o * step.o.mapv(|v| 1.0 - v);

            dc_carry[l] = &dc * &step.f;

            let gate_grads = [&da_f, &da_i, &da_c, &da_o];
            let layer_grads = grads.layers[l].gates_mut();
            for (g, da) in layer_grads.into_iter().zip(gate_grads) {
                outer_add(&mut g.w, da, &step.x);
                outer_add(&mut g.u, da, &step.h_prev);
                g.b += da;
            }

            let gates = layer.gates();
            dh_carry[l] = gates
                .iter()
                .zip(gate_grads)
                .map(|(g, da)| g.u.t().dot(da))
                .reduce(|a, b| a + b)
                .unwrap();
            dx_above = gates
                .iter()
                .zip(gate_grads)
                .map(|(g, da)| g.w.t().dot(da))
                .reduce(|a, b| a + b)
                .unwrap();
        }
    }
    Ok(grads)
}
