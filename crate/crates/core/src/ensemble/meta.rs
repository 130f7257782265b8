use ndarray::Array2;

use crate::lstm::{
    adam_step_params, init_params, lstm_backward, lstm_forward, AdamState, LstmConfig, LstmModel,
};
use crate::seeding::seeded_rng;

use super::oof::OofMatrix;
use super::EnsembleError;

/// Per-timestep simplex weights over (CB, LSTM, LGB) predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightTriple {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl WeightTriple {
    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn sum(&self) -> f64 {
        self.alpha + self.beta + self.gamma
    }
}

/// Exponential normalization of three logits. Guarantees nonnegative
/// weights summing to one (within rounding) by construction.
pub fn softmax3(logits: [f64; 3]) -> [f64; 3] {
    let max = logits[0].max(logits[1]).max(logits[2]);
    let exps = [
        (logits[0] - max).exp(),
        (logits[1] - max).exp(),
        (logits[2] - max).exp(),
    ];
    let total = exps[0] + exps[1] + exps[2];
    [exps[0] / total, exps[1] / total, exps[2] / total]
}

/// The stacking decision layer: a two-layer LSTM over chronological
/// (CB, LSTM, LGB) prediction triples emitting three logits per step.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaModel {
    pub net: LstmModel,
}

impl MetaModel {
    /// Simplex weights for every step of a triple sequence, consumed as one
    /// chronological pass from zero state.
    pub fn weights_for(&self, triples: &[[f64; 3]]) -> Result<Vec<WeightTriple>, EnsembleError> {
        if triples.is_empty() {
            return Err(EnsembleError::EmptyOof);
        }
        let seq = triples_matrix(triples);
        let (logits, _) = lstm_forward(&self.net.params, &seq)?;
        Ok((0..logits.nrows())
            .map(|t| {
                let s = softmax3([logits[[t, 0]], logits[[t, 1]], logits[[t, 2]]]);
                WeightTriple { alpha: s[0], beta: s[1], gamma: s[2] }
            })
            .collect())
    }

    /// Weights for `steps` with a rolling context: step `k`'s weight comes
    /// from running the net over at most `context` preceding triples (drawn
    /// from `history` then earlier steps) plus the step itself, taking the
    /// final logits. Weights therefore depend only on a bounded local
    /// window, so a saved model replays identical weights wherever that
    /// window is reproduced.
    pub fn weights_rolling(
        &self,
        history: &[[f64; 3]],
        steps: &[[f64; 3]],
        context: usize,
    ) -> Result<Vec<WeightTriple>, EnsembleError> {
        let mut all: Vec<[f64; 3]> = Vec::with_capacity(history.len() + steps.len());
        all.extend_from_slice(history);
        all.extend_from_slice(steps);
        let mut weights = Vec::with_capacity(steps.len());
        for k in 0..steps.len() {
            let pos = history.len() + k;
            let start = pos.saturating_sub(context);
            let seq = triples_matrix(&all[start..=pos]);
            let (logits, _) = lstm_forward(&self.net.params, &seq)?;
            let last = logits.nrows() - 1;
            let s = softmax3([logits[[last, 0]], logits[[last, 1]], logits[[last, 2]]]);
            weights.push(WeightTriple { alpha: s[0], beta: s[1], gamma: s[2] });
        }
        Ok(weights)
    }
}

fn triples_matrix(triples: &[[f64; 3]]) -> Array2<f64> {
    Array2::from_shape_fn((triples.len(), 3), |(t, k)| triples[t][k])
}

/// Train the meta-learner on out-of-fold predictions.
///
/// Input is the chronological (CB, LSTM, LGB) triple sequence; per step the
/// three logits pass through exponential normalization and the loss is the
/// mean squared error between the weighted combination and the target.
/// Full-sequence epochs through the shared Adam optimizer.
pub fn fit_meta(oof: &OofMatrix, meta_config: &LstmConfig) -> Result<MetaModel, EnsembleError> {
    if oof.is_empty() {
        return Err(EnsembleError::EmptyOof);
    }
    if meta_config.n_layers != 2 {
        return Err(EnsembleError::MetaLayers(meta_config.n_layers));
    }
    meta_config.validate()?;

    let triples = oof.triples();
    let targets = oof.targets();
    let seq = triples_matrix(&triples);
    let t_len = seq.nrows();

    let mut params = init_params(
        3,
        meta_config.hidden_size,
        2,
        3,
        &mut seeded_rng(meta_config.seed),
    );
    let mut adam = AdamState::new(params.n_params());
    let mut training_loss = Vec::with_capacity(meta_config.epochs);

    for _ in 0..meta_config.epochs {
        let (logits, cache) = lstm_forward(&params, &seq)?;
        let mut loss = 0.0;
        let mut grad_logits = Array2::zeros((t_len, 3));
        let scale = 1.0 / t_len as f64;
        for t in 0..t_len {
            let s = softmax3([logits[[t, 0]], logits[[t, 1]], logits[[t, 2]]]);
            let combined: f64 = (0..3).map(|k| s[k] * triples[t][k]).sum();
            let err = combined - targets[t];
            loss += 0.5 * err * err * scale;
            for k in 0..3 {
                // d combined / d logit_k = s_k * (p_k - combined).
                grad_logits[[t, k]] = err * scale * s[k] * (triples[t][k] - combined);
            }
        }
        let grads = lstm_backward(&params, &cache, &grad_logits)?;
        adam_step_params(
            &mut params,
            &grads,
            &mut adam,
            meta_config.learning_rate,
            meta_config.gradient_clip_norm,
        );
        training_loss.push(loss);
    }

    Ok(MetaModel {
        net: LstmModel {
            params,
            config: meta_config.clone(),
            input_dim: 3,
            out_dim: 3,
            training_loss,
        },
    })
}

/// Exact convex combination per step:
/// `alpha * cb + beta * lstm + gamma * lgb`.
///
/// The weighted sum is clamped into the per-step [min, max] envelope of the
/// three base predictions so the convexity invariant holds exactly even
/// under floating-point rounding of the weights.
pub fn combine(
    weights: &[WeightTriple],
    base_preds: &[[f64; 3]],
) -> Result<Vec<f64>, EnsembleError> {
    if weights.len() != base_preds.len() {
        return Err(EnsembleError::LengthMismatch(format!(
            "{} weight rows vs {} prediction rows",
            weights.len(),
            base_preds.len()
        )));
    }
    Ok(weights
        .iter()
        .zip(base_preds)
        .map(|(w, p)| {
            let raw = w.alpha * p[0] + w.beta * p[1] + w.gamma * p[2];
            let lo = p[0].min(p[1]).min(p[2]);
            let hi = p[0].max(p[1]).max(p[2]);
            raw.clamp(lo, hi)
        })
        .collect())
}
