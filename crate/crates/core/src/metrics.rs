//! Evaluation metrics (MAE, MSE, RMSE, R²) and report assembly.
//!
//! Reports are computed on unscaled price values: [`build_report`] inverts
//! the min-max transform before measuring anything.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataframe::{invert_scaler, DataError, ScalerParams};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("prediction and actual lengths differ ({pred} vs {actual})")]
    LengthMismatch { pred: usize, actual: usize },
    #[error("metric computed on empty vectors")]
    Empty,
    #[error("R² undefined: actual values have zero variance")]
    ZeroVariance,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// One evaluation row — the machine-readable analogue of a comparison-table
/// entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_name: String,
    pub r2: f64,
    pub mae: f64,
    pub mse: f64,
    pub rmse: f64,
    pub n: usize,
}

/// CSV header shared by every report writer.
pub const REPORT_CSV_HEADER: &str = "model,r2,mae,mse,rmse,n";

impl MetricsReport {
    /// One CSV row matching [`REPORT_CSV_HEADER`].
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.model_name, self.r2, self.mae, self.mse, self.rmse, self.n
        )
    }
}

fn check_lengths(pred: &[f64], actual: &[f64]) -> Result<(), MetricsError> {
    if pred.len() != actual.len() {
        return Err(MetricsError::LengthMismatch {
            pred: pred.len(),
            actual: actual.len(),
        });
    }
    if pred.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(pred: &[f64], actual: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(pred, actual)?;
    let sum: f64 = pred.iter().zip(actual).map(|(p, a)| (p - a).abs()).sum();
    Ok(sum / pred.len() as f64)
}

/// Mean squared error.
pub fn mse(pred: &[f64], actual: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(pred, actual)?;
    let sum: f64 = pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Root mean squared error, `sqrt(mse)`.
pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64, MetricsError> {
    Ok(mse(pred, actual)?.sqrt())
}

/// Coefficient of determination:
/// `1 - Σ(actual - pred)² / Σ(actual - mean(actual))²`.
///
/// A predictor worse than the constant mean yields a negative value.
pub fn r2(pred: &[f64], actual: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(pred, actual)?;
    if pred.len() < 2 {
        return Err(MetricsError::Empty);
    }
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    let ss_tot: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    if ss_tot == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    let ss_res: f64 = pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (a - p) * (a - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Inverse-scale both vectors through the target column's params, then
/// compute all four metrics in price units.
pub fn build_report(
    pred: &[f64],
    actual: &[f64],
    model_name: &str,
    scaler: &ScalerParams,
    target_column: &str,
) -> Result<MetricsReport, MetricsError> {
    let pred_prices = invert_scaler(pred, scaler, target_column)?;
    let actual_prices = invert_scaler(actual, scaler, target_column)?;
    Ok(MetricsReport {
        model_name: model_name.to_string(),
        r2: r2(&pred_prices, &actual_prices)?,
        mae: mae(&pred_prices, &actual_prices)?,
        mse: mse(&pred_prices, &actual_prices)?,
        rmse: rmse(&pred_prices, &actual_prices)?,
        n: pred.len(),
    })
}
