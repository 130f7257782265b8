use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;

use super::DataError;

/// Name of the date column every input CSV must carry.
pub const DATE_COLUMN: &str = "date";

/// Default forecast target.
pub const DEFAULT_TARGET: &str = "close";

/// A cleaned-or-cleanable table of daily rows: strictly increasing dates
/// plus equally long numeric columns. Missing values are `NaN` until
/// [`handle_missing`] removes them.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    timestamps: Vec<NaiveDate>,
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    target_name: String,
}

impl TimeSeriesFrame {
    /// Build a frame from parts. Callers are responsible for the ordering
    /// invariant; [`load_csv`] is the checked entry point.
    pub fn new(
        timestamps: Vec<NaiveDate>,
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target_name: &str,
    ) -> Self {
        assert!(
            columns.iter().all(|c| c.len() == timestamps.len()),
            "column lengths must match timestamps"
        );
        assert!(
            names.iter().any(|n| n == target_name),
            "target `{target_name}` must be one of the columns"
        );
        Self {
            timestamps,
            names,
            columns,
            target_name: target_name.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[NaiveDate] {
        &self.timestamps
    }

    pub fn column_names(&self) -> &[String] {
        &self.names
    }

    pub fn n_columns(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, name: &str) -> Result<&[f64], DataError> {
        let idx = self.column_index(name)?;
        Ok(&self.columns[idx])
    }

    pub fn column_by_index(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DataError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Returns a copy of the frame forecasting a different column.
    pub fn with_target(mut self, target: &str) -> Result<Self, DataError> {
        self.column_index(target)?;
        self.target_name = target.to_string();
        Ok(self)
    }

    /// True if any cell is a missing marker.
    pub fn has_missing(&self) -> bool {
        self.columns.iter().any(|c| c.iter().any(|v| v.is_nan()))
    }

    fn retain_rows(&self, keep: &[bool]) -> Self {
        let indices: Vec<usize> = (0..self.len()).filter(|&i| keep[i]).collect();
        Self {
            timestamps: indices.iter().map(|&i| self.timestamps[i]).collect(),
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| indices.iter().map(|&i| c[i]).collect())
                .collect(),
            target_name: self.target_name.clone(),
        }
    }

    pub(super) fn columns_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.columns
    }
}

/// Missing-value policy for [`handle_missing`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    /// Copy the most recent prior value per column; rows missing before any
    /// observed value are dropped.
    ForwardFill,
    /// Remove any row containing a marker.
    DropRow,
}

impl Default for MissingPolicy {
    fn default() -> Self {
        MissingPolicy::ForwardFill
    }
}

fn parse_cell(raw: &str) -> f64 {
    let trimmed = raw.trim();
    if trimmed.is_empty()
        || trimmed.eq_ignore_ascii_case("n/a")
        || trimmed.eq_ignore_ascii_case("nan")
    {
        return f64::NAN;
    }
    match trimmed.parse::<f64>() {
        // Non-finite cells are treated as missing; downstream invariants
        // require finite values.
        Ok(v) if v.is_finite() => v,
        _ => f64::NAN,
    }
}

/// Load an OHLCV-style CSV into a frame.
///
/// `schema` lists the expected column names including `date`. Extra columns
/// in the file are ignored. Rows are sorted ascending by date; unparseable
/// numeric cells become missing markers rather than dropping the row.
pub fn load_csv<P: AsRef<Path>>(path: P, schema: &[String]) -> Result<TimeSeriesFrame, DataError> {
    let file = std::fs::File::open(path)?;
    load_csv_reader(file, schema)
}

/// [`load_csv`] over any reader; used by tests and the CLI.
pub fn load_csv_reader<R: Read>(
    reader: R,
    schema: &[String],
) -> Result<TimeSeriesFrame, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let header_pos = |name: &str| headers.iter().position(|h| h.trim() == name);

    let date_pos = header_pos(DATE_COLUMN)
        .ok_or_else(|| DataError::MissingColumn(DATE_COLUMN.to_string()))?;
    let value_names: Vec<String> = schema
        .iter()
        .filter(|n| n.as_str() != DATE_COLUMN)
        .cloned()
        .collect();
    let mut value_pos = Vec::with_capacity(value_names.len());
    for name in &value_names {
        let pos = header_pos(name).ok_or_else(|| DataError::MissingColumn(name.clone()))?;
        value_pos.push(pos);
    }

    let mut rows: Vec<(NaiveDate, Vec<f64>)> = Vec::new();
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let raw_date = record.get(date_pos).unwrap_or("").trim();
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
            DataError::InvalidDate {
                row: row_idx + 1,
                value: raw_date.to_string(),
            }
        })?;
        let values: Vec<f64> = value_pos
            .iter()
            .map(|&p| parse_cell(record.get(p).unwrap_or("")))
            .collect();
        rows.push((date, values));
    }
    if rows.is_empty() {
        return Err(DataError::EmptyFile);
    }

    rows.sort_by_key(|(d, _)| *d);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(DataError::DuplicateTimestamp(pair[0].0.to_string()));
        }
    }

    let timestamps: Vec<NaiveDate> = rows.iter().map(|(d, _)| *d).collect();
    let columns: Vec<Vec<f64>> = (0..value_names.len())
        .map(|c| rows.iter().map(|(_, v)| v[c]).collect())
        .collect();

    let target = if value_names.iter().any(|n| n == DEFAULT_TARGET) {
        DEFAULT_TARGET.to_string()
    } else {
        value_names[0].clone()
    };
    Ok(TimeSeriesFrame::new(timestamps, value_names, columns, &target))
}

/// Remove missing markers according to `policy`.
pub fn handle_missing(
    frame: &TimeSeriesFrame,
    policy: MissingPolicy,
) -> Result<TimeSeriesFrame, DataError> {
    for (name, col) in frame.names.iter().zip(&frame.columns) {
        if col.iter().all(|v| v.is_nan()) {
            return Err(DataError::AllMissingColumn(name.clone()));
        }
    }
    match policy {
        MissingPolicy::ForwardFill => {
            let mut filled = frame.clone();
            let n = filled.len();
            let mut keep = vec![true; n];
            for col in filled.columns_mut() {
                let mut last: Option<f64> = None;
                for (i, v) in col.iter_mut().enumerate() {
                    if v.is_nan() {
                        match last {
                            Some(prev) => *v = prev,
                            None => keep[i] = false,
                        }
                    } else {
                        last = Some(*v);
                    }
                }
            }
            Ok(filled.retain_rows(&keep))
        }
        MissingPolicy::DropRow => {
            let keep: Vec<bool> = (0..frame.len())
                .map(|i| frame.columns.iter().all(|c| !c[i].is_nan()))
                .collect();
            Ok(frame.retain_rows(&keep))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> Vec<String> {
        ["date", "open", "close"].iter().map(|s| s.to_string()).collect()
    }

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn loads_sorted_rows() {
        let csv = "date,open,close\n2016-01-04,1,2\n2016-01-05,3,4\n2016-01-06,5,6\n";
        let frame = load_csv_reader(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(frame.len(), 3);
        assert_eq!(frame.timestamps()[0], date("2016-01-04"));
        assert_eq!(frame.column("close").unwrap(), &[2.0, 4.0, 6.0]);
        assert_eq!(frame.target_name(), "close");
    }

    #[test]
    fn shuffled_rows_load_identically() {
        let sorted = "date,open,close\n2016-01-04,1,2\n2016-01-05,3,4\n2016-01-06,5,6\n";
        let shuffled = "date,open,close\n2016-01-06,5,6\n2016-01-04,1,2\n2016-01-05,3,4\n";
        let a = load_csv_reader(sorted.as_bytes(), &schema()).unwrap();
        let b = load_csv_reader(shuffled.as_bytes(), &schema()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unparseable_cell_becomes_marker() {
        let csv = "date,open,close\n2016-01-04,1,2\n2016-01-05,3,N/A\n2016-01-06,5,6\n";
        let frame = load_csv_reader(csv.as_bytes(), &schema()).unwrap();
        let close = frame.column("close").unwrap();
        assert!(close[1].is_nan());
        assert_eq!(close[0], 2.0);
        assert_eq!(close[2], 6.0);
        assert!(!frame.column("open").unwrap()[1].is_nan());
    }

    #[test]
    fn missing_column_rejected() {
        let csv = "date,open\n2016-01-04,1\n";
        let err = load_csv_reader(csv.as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, DataError::MissingColumn(c) if c == "close"));
    }

    #[test]
    fn empty_file_rejected() {
        let csv = "date,open,close\n";
        let err = load_csv_reader(csv.as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, DataError::EmptyFile));
    }

    #[test]
    fn duplicate_timestamp_rejected() {
        let csv = "date,open,close\n2016-01-04,1,2\n2016-01-04,3,4\n";
        let err = load_csv_reader(csv.as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, DataError::DuplicateTimestamp(_)));
    }

    #[test]
    fn forward_fill_copies_prior_value() {
        let csv = "date,open,close\n2016-01-04,1,1\n2016-01-05,1,N/A\n2016-01-06,1,3\n";
        let frame = load_csv_reader(csv.as_bytes(), &schema()).unwrap();
        let clean = handle_missing(&frame, MissingPolicy::ForwardFill).unwrap();
        assert_eq!(clean.column("close").unwrap(), &[1.0, 1.0, 3.0]);
        assert!(!clean.has_missing());
    }

    #[test]
    fn forward_fill_drops_leading_missing() {
        let csv = "date,open,close\n2016-01-04,1,N/A\n2016-01-05,1,2\n";
        let frame = load_csv_reader(csv.as_bytes(), &schema()).unwrap();
        let clean = handle_missing(&frame, MissingPolicy::ForwardFill).unwrap();
        assert_eq!(clean.len(), 1);
        assert_eq!(clean.column("close").unwrap(), &[2.0]);
        assert_eq!(clean.timestamps()[0], date("2016-01-05"));
    }

    #[test]
    fn drop_row_removes_marked_rows() {
        let mut body = String::from("date,open,close\n");
        for day in 1..=10 {
            let close = if day == 3 || day == 7 { "N/A".to_string() } else { day.to_string() };
            body.push_str(&format!("2016-01-{day:02},{day},{close}\n"));
        }
        let frame = load_csv_reader(body.as_bytes(), &schema()).unwrap();
        let clean = handle_missing(&frame, MissingPolicy::DropRow).unwrap();
        assert_eq!(clean.len(), 8);
        assert!(!clean.has_missing());
        let ts = clean.timestamps();
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn all_missing_column_rejected() {
        let csv = "date,open,close\n2016-01-04,1,N/A\n2016-01-05,2,NaN\n";
        let frame = load_csv_reader(csv.as_bytes(), &schema()).unwrap();
        let err = handle_missing(&frame, MissingPolicy::ForwardFill).unwrap_err();
        assert!(matches!(err, DataError::AllMissingColumn(c) if c == "close"));
    }
}
