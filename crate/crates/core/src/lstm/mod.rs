//! From-scratch LSTM regressor: gated cell forward pass, full-sequence
//! backpropagation through time, global-norm gradient clipping, and an
//! adaptive-moment optimizer.
//!
//! Gate activations are logistic sigmoid, candidate/output activations are
//! tanh. The output head is linear, since targets are scaled prices that may
//! exceed [0, 1] at test time. One- and two-layer stacks are supported; the
//! two-layer variant backs the ensemble's meta-learner.

mod gradcheck;
mod network;
mod optimizer;
mod params;
mod train;

pub use gradcheck::{finite_diff_gradcheck, finite_diff_max_rel_error, loss_and_grads};
pub use network::{lstm_backward, lstm_cell_forward, lstm_forward, ForwardCache, LstmState, StepCache};
pub use optimizer::{adam_step, adam_step_params, clip_global_norm, AdamState};
pub use params::{init_params, GateParams, LayerParams, LstmParams};
pub use train::{fit_lstm, train_from_params, LstmConfig, LstmModel};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LstmError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cache does not match gradient shape: {0}")]
    CacheMismatch(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("model document malformed: {0}")]
    BadDocument(String),
}
