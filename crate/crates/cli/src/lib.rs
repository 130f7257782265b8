//! Command-line pipeline around the stackcast engine: configuration
//! handling, synthetic data generation, seeded end-to-end runs, and
//! comparison-report emission.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod pipeline;
pub mod synth;

/// Process-level error split driving the exit-code contract:
/// 0 success, 1 runtime/data error, 2 config error.
#[derive(Debug)]
pub enum AppError {
    Config(String),
    Runtime(anyhow::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Config(msg) => write!(f, "config error: {msg}"),
            AppError::Runtime(err) => write!(f, "error: {err:#}"),
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for AppError {
    fn from(err: E) -> Self {
        AppError::Runtime(err.into())
    }
}
