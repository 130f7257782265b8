//! Data pipeline: CSV ingestion, missing-value handling, min-max scaling,
//! sliding-window construction, and chronological splitting.
//!
//! All operations are pure transformations on immutable inputs. Missing
//! values are represented internally as `f64::NAN`; a cleaned frame carries
//! none.

mod frame;
mod scaler;
mod window;

pub use frame::{handle_missing, load_csv, load_csv_reader, MissingPolicy, TimeSeriesFrame};
pub use scaler::{apply_scaler, fit_scaler, invert_scaler, scale_values, ColumnScale, ScalerParams};
pub use window::{chronological_split, make_windows, WindowedDataset};

use thiserror::Error;

/// Errors produced by the data pipeline.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("column `{0}` missing from CSV header")]
    MissingColumn(String),
    #[error("CSV contains no data rows")]
    EmptyFile,
    #[error("duplicate timestamp `{0}`")]
    DuplicateTimestamp(String),
    #[error("row {row}: cannot parse `{value}` as an ISO-8601 date")]
    InvalidDate { row: usize, value: String },
    #[error("column `{0}` has no observed values")]
    AllMissingColumn(String),
    #[error("scaler fitted on an empty row range")]
    EmptyRange,
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("frame has {rows} rows; needs more than lookback {lookback}")]
    FrameTooShort { rows: usize, lookback: usize },
    #[error("split leaves an empty side ({train} train / {test} test)")]
    DegenerateSplit { train: usize, test: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
