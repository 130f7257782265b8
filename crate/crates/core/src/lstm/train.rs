use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataframe::WindowedDataset;
use crate::seeding::{derive_seed, seeded_rng};

use super::network::{lstm_backward, lstm_forward};
use super::optimizer::{adam_step_params, AdamState};
use super::params::{init_params, LstmParams};
use super::LstmError;

const SHUFFLE_STREAM: u64 = 0x1f5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LstmConfig {
    pub hidden_size: usize,
    /// 1 for the base learner, 2 for the meta-learner backbone.
    pub n_layers: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gradient_clip_norm: f64,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        Self {
            hidden_size: 32,
            n_layers: 1,
            epochs: 80,
            batch_size: 32,
            learning_rate: 0.01,
            gradient_clip_norm: 5.0,
            seed: 0,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<(), LstmError> {
        if self.hidden_size == 0 {
            return Err(LstmError::ConfigInvalid("hidden_size must be at least 1".into()));
        }
        if !(self.n_layers == 1 || self.n_layers == 2) {
            return Err(LstmError::ConfigInvalid("n_layers must be 1 or 2".into()));
        }
        if self.batch_size == 0 {
            return Err(LstmError::ConfigInvalid("batch_size must be at least 1".into()));
        }
        if self.learning_rate <= 0.0 {
            return Err(LstmError::ConfigInvalid("learning_rate must be positive".into()));
        }
        if self.gradient_clip_norm <= 0.0 {
            return Err(LstmError::ConfigInvalid("gradient_clip_norm must be positive".into()));
        }
        Ok(())
    }
}

/// A trained LSTM regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    pub params: LstmParams,
    pub config: LstmConfig,
    pub input_dim: usize,
    pub out_dim: usize,
    /// Mean training loss per epoch.
    pub training_loss: Vec<f64>,
}

/// One sample's window as a `[lookback, n_features]` matrix.
pub(crate) fn window_matrix(ds: &WindowedDataset, i: usize) -> Array2<f64> {
    Array2::from_shape_vec(
        (ds.lookback(), ds.n_features()),
        ds.flat_input(i).to_vec(),
    )
    .expect("window layout is [time][feature]")
}

/// Mini-batch training from explicit starting parameters.
///
/// Batches are shuffled per epoch from a stream derived from `config.seed`
/// (the last partial batch is kept). Loss is `0.5 * mean((yhat - y)^2)` over
/// the batch, on final-step predictions. Returns the trained parameters and
/// the mean loss per epoch.
pub fn train_from_params(
    mut params: LstmParams,
    windows: &WindowedDataset,
    config: &LstmConfig,
) -> Result<(LstmParams, Vec<f64>), LstmError> {
    config.validate()?;
    if windows.is_empty() {
        return Err(LstmError::ConfigInvalid("training dataset is empty".into()));
    }
    let t_len = windows.lookback();
    let mut rng = seeded_rng(derive_seed(config.seed, SHUFFLE_STREAM));
    let mut adam = AdamState::new(params.n_params());
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..windows.n_samples()).collect();

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut n_batches = 0usize;
        for batch in order.chunks(config.batch_size) {
            let mut grads = params.zeros_like();
            let mut batch_loss = 0.0;
            let scale = 1.0 / batch.len() as f64;
            for &idx in batch {
                let seq = window_matrix(windows, idx);
                let (preds, cache) = lstm_forward(&params, &seq)?;
                let err = preds[[t_len - 1, 0]] - windows.targets()[idx];
                batch_loss += 0.5 * err * err * scale;
                let mut grad_preds = Array2::zeros((t_len, 1));
                grad_preds[[t_len - 1, 0]] = err * scale;
                let sample_grads = lstm_backward(&params, &cache, &grad_preds)?;
                grads.add_assign(&sample_grads);
            }
            adam_step_params(
                &mut params,
                &grads,
                &mut adam,
                config.learning_rate,
                config.gradient_clip_norm,
            );
            loss_sum += batch_loss;
            n_batches += 1;
        }
        epoch_losses.push(loss_sum / n_batches as f64);
    }
    Ok((params, epoch_losses))
}

/// Seeded initialization plus [`train_from_params`]. Deterministic given
/// `(windows, config)`.
pub fn fit_lstm(windows: &WindowedDataset, config: &LstmConfig) -> Result<LstmModel, LstmError> {
    config.validate()?;
    if windows.is_empty() {
        return Err(LstmError::ConfigInvalid("training dataset is empty".into()));
    }
    let mut init_rng = seeded_rng(config.seed);
    let params = init_params(
        windows.n_features(),
        config.hidden_size,
        config.n_layers,
        1,
        &mut init_rng,
    );
    let input_dim = windows.n_features();
    let (params, training_loss) = train_from_params(params, windows, config)?;
    Ok(LstmModel {
        params,
        config: config.clone(),
        input_dim,
        out_dim: 1,
        training_loss,
    })
}

impl LstmModel {
    /// Final-step prediction for one window of the dataset.
    pub fn predict_window(&self, ds: &WindowedDataset, i: usize) -> Result<f64, LstmError> {
        assert_eq!(self.out_dim, 1, "scalar prediction needs a 1-dim head");
        let seq = window_matrix(ds, i);
        let (preds, _) = lstm_forward(&self.params, &seq)?;
        Ok(preds[[preds.nrows() - 1, 0]])
    }

    pub fn predict_all(&self, ds: &WindowedDataset) -> Result<Vec<f64>, LstmError> {
        (0..ds.n_samples()).map(|i| self.predict_window(ds, i)).collect()
    }
}

// --- serialization -----------------------------------------------------

const FORMAT_VERSION: u32 = 1;
const KIND: &str = "lstm";

#[derive(Serialize, Deserialize)]
struct LstmModelDoc {
    format_version: u32,
    kind: String,
    config: LstmConfig,
    input_dim: usize,
    out_dim: usize,
    /// All weights flattened row-major in the canonical parameter order.
    weights: Vec<f64>,
    training_loss: Vec<f64>,
}

impl LstmModel {
    pub fn to_json(&self) -> String {
        let doc = LstmModelDoc {
            format_version: FORMAT_VERSION,
            kind: KIND.to_string(),
            config: self.config.clone(),
            input_dim: self.input_dim,
            out_dim: self.out_dim,
            weights: self.params.to_flat(),
            training_loss: self.training_loss.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("lstm document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, LstmError> {
        let doc: LstmModelDoc =
            serde_json::from_str(text).map_err(|e| LstmError::BadDocument(e.to_string()))?;
        if doc.kind != KIND {
            return Err(LstmError::BadDocument(format!("kind `{}` is not `{KIND}`", doc.kind)));
        }
        if doc.format_version != FORMAT_VERSION {
            return Err(LstmError::BadDocument(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        doc.config.validate()?;
        let mut params = init_params(
            doc.input_dim,
            doc.config.hidden_size,
            doc.config.n_layers,
            doc.out_dim,
            &mut seeded_rng(0),
        )
        .zeros_like();
        if doc.weights.len() != params.n_params() {
            return Err(LstmError::BadDocument(format!(
                "expected {} weights, found {}",
                params.n_params(),
                doc.weights.len()
            )));
        }
        params.assign_from_flat(&doc.weights);
        Ok(LstmModel {
            params,
            config: doc.config,
            input_dim: doc.input_dim,
            out_dim: doc.out_dim,
            training_loss: doc.training_loss,
        })
    }
}
