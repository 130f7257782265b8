use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::frame::TimeSeriesFrame;
use super::DataError;

/// Per-column min/max learned from training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl ColumnScale {
    /// A constant training column scales every value to 0.0.
    pub fn is_degenerate(&self) -> bool {
        self.min == self.max
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            0.0
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    pub fn invert(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }
}

/// Min-max scaling parameters for a frame's columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub columns: Vec<ColumnScale>,
}

impl ScalerParams {
    pub fn column(&self, name: &str) -> Result<&ColumnScale, DataError> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }
}

/// Learn per-column min/max over `train_rows` only, so no test information
/// leaks into the transform.
pub fn fit_scaler(
    frame: &TimeSeriesFrame,
    train_rows: Range<usize>,
) -> Result<ScalerParams, DataError> {
    if train_rows.is_empty() || train_rows.end > frame.len() {
        return Err(DataError::EmptyRange);
    }
    let columns = frame
        .column_names()
        .iter()
        .enumerate()
        .map(|(idx, name)| {
            let slice = &frame.column_by_index(idx)[train_rows.clone()];
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for &v in slice {
                min = min.min(v);
                max = max.max(v);
            }
            ColumnScale {
                name: name.clone(),
                min,
                max,
            }
        })
        .collect();
    Ok(ScalerParams { columns })
}

/// Map every column through `x -> (x - min) / (max - min)`.
///
/// Training rows land in [0, 1]; later rows may fall outside the interval
/// and are deliberately not clipped.
pub fn apply_scaler(
    frame: &TimeSeriesFrame,
    params: &ScalerParams,
) -> Result<TimeSeriesFrame, DataError> {
    let mut scaled = frame.clone();
    for (idx, name) in frame.column_names().to_vec().iter().enumerate() {
        let scale = params.column(name)?;
        for v in &mut scaled.columns_mut()[idx] {
            *v = scale.apply(*v);
        }
    }
    Ok(scaled)
}

/// Exact algebraic inverse of [`apply_scaler`] for one column.
pub fn invert_scaler(
    values: &[f64],
    params: &ScalerParams,
    column: &str,
) -> Result<Vec<f64>, DataError> {
    let scale = params.column(column)?;
    Ok(values.iter().map(|&v| scale.invert(v)).collect())
}

/// Forward-scale raw values for one column; the inverse of [`invert_scaler`].
pub fn scale_values(
    values: &[f64],
    params: &ScalerParams,
    column: &str,
) -> Result<Vec<f64>, DataError> {
    let scale = params.column(column)?;
    Ok(values.iter().map(|&v| scale.apply(v)).collect())
}
