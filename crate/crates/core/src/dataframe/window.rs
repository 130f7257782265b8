use chrono::NaiveDate;

use super::frame::TimeSeriesFrame;
use super::DataError;

/// Sliding-window supervised dataset: each sample's input covers the
/// `lookback` rows strictly preceding its target row.
///
/// Inputs are stored flat in `[sample][time][feature]` order, so the
/// per-sample slice doubles as the flattened feature vector used by the
/// tree models.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    sample_timestamps: Vec<NaiveDate>,
    lookback: usize,
    n_features: usize,
    feature_names: Vec<String>,
}

impl WindowedDataset {
    pub fn new(
        inputs: Vec<f64>,
        targets: Vec<f64>,
        sample_timestamps: Vec<NaiveDate>,
        lookback: usize,
        n_features: usize,
        feature_names: Vec<String>,
    ) -> Self {
        assert_eq!(inputs.len(), targets.len() * lookback * n_features);
        assert_eq!(targets.len(), sample_timestamps.len());
        assert_eq!(feature_names.len(), n_features);
        Self {
            inputs,
            targets,
            sample_timestamps,
            lookback,
            n_features,
            feature_names,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn lookback(&self) -> usize {
        self.lookback
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn sample_timestamps(&self) -> &[NaiveDate] {
        &self.sample_timestamps
    }

    /// Flattened input for sample `i`: `lookback * n_features` values.
    pub fn flat_input(&self, i: usize) -> &[f64] {
        let w = self.lookback * self.n_features;
        &self.inputs[i * w..(i + 1) * w]
    }

    /// Timestep `t` of sample `i` as one `n_features` row.
    pub fn input_step(&self, i: usize, t: usize) -> &[f64] {
        let w = self.lookback * self.n_features;
        let start = i * w + t * self.n_features;
        &self.inputs[start..start + self.n_features]
    }

    /// Number of flattened features per sample.
    pub fn flat_width(&self) -> usize {
        self.lookback * self.n_features
    }

    /// Column-major copy of the flattened inputs, one column per
    /// (timestep, feature) pair — the layout the tree models bin.
    pub fn flat_columns(&self) -> Vec<Vec<f64>> {
        let width = self.flat_width();
        let n = self.n_samples();
        let mut cols = vec![Vec::with_capacity(n); width];
        for i in 0..n {
            let row = self.flat_input(i);
            for (c, &v) in row.iter().enumerate() {
                cols[c].push(v);
            }
        }
        cols
    }

    /// Sub-dataset over a contiguous sample range.
    pub fn slice(&self, range: std::ops::Range<usize>) -> WindowedDataset {
        let w = self.flat_width();
        WindowedDataset {
            inputs: self.inputs[range.start * w..range.end * w].to_vec(),
            targets: self.targets[range.clone()].to_vec(),
            sample_timestamps: self.sample_timestamps[range.clone()].to_vec(),
            lookback: self.lookback,
            n_features: self.n_features,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Replace all targets; inputs are untouched. Used by leakage tests.
    pub fn with_targets(&self, targets: Vec<f64>) -> WindowedDataset {
        assert_eq!(targets.len(), self.targets.len());
        WindowedDataset {
            targets,
            ..self.clone()
        }
    }
}

/// Build single-step-horizon windows: sample `i` has input rows
/// `[i, i + lookback)` over all feature columns and target
/// `target_column[i + lookback]`.
pub fn make_windows(
    frame: &TimeSeriesFrame,
    lookback: usize,
) -> Result<WindowedDataset, DataError> {
    assert!(lookback > 0, "lookback must be positive");
    let rows = frame.len();
    if rows <= lookback {
        return Err(DataError::FrameTooShort { rows, lookback });
    }
    let n_features = frame.n_columns();
    let n_samples = rows - lookback;
    let target_col = frame.column(frame.target_name())?;

    let mut inputs = Vec::with_capacity(n_samples * lookback * n_features);
    for i in 0..n_samples {
        for t in i..i + lookback {
            for f in 0..n_features {
                inputs.push(frame.column_by_index(f)[t]);
            }
        }
    }
    let targets: Vec<f64> = (0..n_samples).map(|i| target_col[i + lookback]).collect();
    let sample_timestamps: Vec<NaiveDate> = (0..n_samples)
        .map(|i| frame.timestamps()[i + lookback])
        .collect();

    Ok(WindowedDataset::new(
        inputs,
        targets,
        sample_timestamps,
        lookback,
        n_features,
        frame.column_names().to_vec(),
    ))
}

/// Split into the first `floor(n * train_fraction)` samples and the rest.
pub fn chronological_split(
    ds: &WindowedDataset,
    train_fraction: f64,
) -> Result<(WindowedDataset, WindowedDataset), DataError> {
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train_fraction must lie in (0, 1)"
    );
    let n = ds.n_samples();
    let n_train = ((n as f64) * train_fraction).floor() as usize;
    let n_test = n - n_train;
    if n_train == 0 || n_test == 0 {
        return Err(DataError::DegenerateSplit {
            train: n_train,
            test: n_test,
        });
    }
    Ok((ds.slice(0..n_train), ds.slice(n_train..n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn frame_of(values: Vec<f64>) -> TimeSeriesFrame {
        let timestamps: Vec<NaiveDate> = (0..values.len())
            .map(|i| NaiveDate::from_num_days_from_ce_opt(736000 + i as i32).unwrap())
            .collect();
        TimeSeriesFrame::new(timestamps, vec!["close".into()], vec![values], "close")
    }

    #[test]
    fn sample_count_is_rows_minus_lookback() {
        let ds = make_windows(&frame_of(vec![1.0, 2.0, 3.0, 4.0, 5.0]), 2).unwrap();
        assert_eq!(ds.n_samples(), 3);
    }

    #[test]
    fn targets_are_offset_by_lookback() {
        let ds = make_windows(&frame_of(vec![1.0, 2.0, 3.0, 4.0, 5.0]), 2).unwrap();
        assert_eq!(ds.targets(), &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn first_window_slices_leading_rows() {
        let ds = make_windows(&frame_of(vec![10.0, 20.0, 30.0, 40.0]), 2).unwrap();
        assert_eq!(ds.flat_input(0), &[10.0, 20.0]);
        assert_eq!(ds.input_step(0, 0), &[10.0]);
        assert_eq!(ds.input_step(0, 1), &[20.0]);
    }

    #[test]
    fn too_short_frame_rejected() {
        let err = make_windows(&frame_of(vec![1.0, 2.0]), 2).unwrap_err();
        assert!(matches!(err, DataError::FrameTooShort { .. }));
    }

    #[test]
    fn split_uses_floor_arithmetic() {
        let ds = make_windows(&frame_of((0..12).map(f64::from).collect()), 2).unwrap();
        assert_eq!(ds.n_samples(), 10);
        let (train, test) = chronological_split(&ds, 0.8).unwrap();
        assert_eq!((train.n_samples(), test.n_samples()), (8, 2));
        let (train, test) = chronological_split(&ds, 0.95).unwrap();
        assert_eq!((train.n_samples(), test.n_samples()), (9, 1));
    }

    #[test]
    fn split_order_is_chronological() {
        let ds = make_windows(&frame_of((0..12).map(f64::from).collect()), 2).unwrap();
        let (train, test) = chronological_split(&ds, 0.8).unwrap();
        let max_train = train.sample_timestamps().iter().max().unwrap();
        let min_test = test.sample_timestamps().iter().min().unwrap();
        assert!(max_train < min_test);
    }

    #[test]
    fn degenerate_split_rejected() {
        let ds = make_windows(&frame_of(vec![1.0, 2.0, 3.0, 4.0]), 2).unwrap();
        assert!(matches!(
            chronological_split(&ds, 0.4),
            Err(DataError::DegenerateSplit { .. })
        ));
    }

    #[test]
    fn no_lookahead_in_any_window() {
        // Window i covers rows [i, i+lookback); its target sits at row
        // i+lookback, so every input row index is strictly smaller.
        let frame = frame_of((0..30).map(f64::from).collect());
        let ds = make_windows(&frame, 5).unwrap();
        for i in 0..ds.n_samples() {
            let target_row = i + ds.lookback();
            for t in 0..ds.lookback() {
                // Single feature: the stored value IS the row index.
                let value = ds.input_step(i, t)[0] as usize;
                assert!(value < target_row);
            }
        }
    }
}
