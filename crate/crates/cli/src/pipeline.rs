use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use stackcast::dataframe::{
    apply_scaler, chronological_split, fit_scaler, handle_missing, load_csv, make_windows,
    MissingPolicy, ScalerParams, WindowedDataset,
};
use stackcast::ensemble::{
    fit_ensemble, predict_ensemble, predict_ensemble_fresh, EnsembleModel, WeightTriple,
};
use stackcast::gbdt::{fit_gbdt, BoostConfig, GbdtModel};
use stackcast::lstm::{fit_lstm, LstmConfig, LstmModel};

use crate::config::RunConfig;

/// The four trainable model rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    GbdtLeafwise,
    GbdtOblivious,
    Lstm,
    Ensemble,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::GbdtLeafwise => "gbdt-leafwise",
            ModelKind::GbdtOblivious => "gbdt-oblivious",
            ModelKind::Lstm => "lstm",
            ModelKind::Ensemble => "ensemble",
        }
    }

    pub fn parse(name: &str) -> anyhow::Result<Self> {
        match name {
            "gbdt-leafwise" => Ok(ModelKind::GbdtLeafwise),
            "gbdt-oblivious" => Ok(ModelKind::GbdtOblivious),
            "lstm" => Ok(ModelKind::Lstm),
            "ensemble" => Ok(ModelKind::Ensemble),
            other => bail!(
                "unknown model `{other}` (expected gbdt-leafwise, gbdt-oblivious, lstm, or ensemble)"
            ),
        }
    }
}

/// Preprocessing metadata stored alongside every model so `predict` can
/// rebuild the exact training-time transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineMeta {
    pub schema: Vec<String>,
    pub target: String,
    pub lookback: usize,
    pub train_fraction: f64,
    pub missing_policy: MissingPolicy,
    pub scaler: ScalerParams,
}

/// Scaled, windowed, and chronologically split data for one run.
pub struct PreparedData {
    pub scaler: ScalerParams,
    pub windows: WindowedDataset,
    pub train: WindowedDataset,
    pub test: WindowedDataset,
}

/// Load, clean, scale (fit on training rows only), window, and split.
pub fn prepare(config: &RunConfig, csv_path: &Path) -> anyhow::Result<PreparedData> {
    let frame = load_csv(csv_path, &config.schema)
        .with_context(|| format!("loading {}", csv_path.display()))?;
    let frame = frame.with_target(&config.target)?;
    let clean = handle_missing(&frame, config.missing_policy)?;

    let rows = clean.len();
    if rows <= config.lookback {
        bail!(
            "data has {rows} usable rows; forecasting needs more than lookback + 1 = {}",
            config.lookback + 1
        );
    }
    let n_windows = rows - config.lookback;
    let n_train = ((n_windows as f64) * config.train_fraction).floor() as usize;
    // Scaler rows cover exactly the rows training windows and targets touch.
    let scaler = fit_scaler(&clean, 0..(n_train + config.lookback).min(rows))?;
    let scaled = apply_scaler(&clean, &scaler)?;
    let windows = make_windows(&scaled, config.lookback)?;
    let (train, test) = chronological_split(&windows, config.train_fraction)?;
    Ok(PreparedData { scaler, windows, train, test })
}

/// Prepare a dataset for prediction with an already-fitted pipeline.
pub fn prepare_for_predict(
    meta: &PipelineMeta,
    csv_path: &Path,
) -> anyhow::Result<WindowedDataset> {
    let frame = load_csv(csv_path, &meta.schema)
        .with_context(|| format!("loading {}", csv_path.display()))?;
    let frame = frame.with_target(&meta.target)?;
    let clean = handle_missing(&frame, meta.missing_policy)?;
    if clean.len() <= meta.lookback {
        bail!(
            "data has {} usable rows; forecasting needs more than lookback + 1 = {}",
            clean.len(),
            meta.lookback + 1
        );
    }
    let scaled = apply_scaler(&clean, &meta.scaler)?;
    Ok(make_windows(&scaled, meta.lookback)?)
}

/// A fitted model of any kind.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    GbdtLeafwise(GbdtModel),
    GbdtOblivious(GbdtModel),
    Lstm(LstmModel),
    Ensemble(Box<EnsembleModel>),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::GbdtLeafwise(_) => ModelKind::GbdtLeafwise,
            TrainedModel::GbdtOblivious(_) => ModelKind::GbdtOblivious,
            TrainedModel::Lstm(_) => ModelKind::Lstm,
            TrainedModel::Ensemble(_) => ModelKind::Ensemble,
        }
    }

    /// Predict a test split that follows the training split (the ensemble
    /// warm-starts its meta context from the training tail).
    pub fn predict_split(
        &self,
        test: &WindowedDataset,
    ) -> anyhow::Result<(Vec<f64>, Option<Vec<WeightTriple>>)> {
        match self {
            TrainedModel::GbdtLeafwise(m) | TrainedModel::GbdtOblivious(m) => {
                let preds = (0..test.n_samples())
                    .map(|i| m.predict(test.flat_input(i)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((preds, None))
            }
            TrainedModel::Lstm(m) => Ok((m.predict_all(test)?, None)),
            TrainedModel::Ensemble(m) => {
                let (preds, weights) = predict_ensemble(m, test)?;
                Ok((preds, Some(weights)))
            }
        }
    }

    /// Predict every window of a standalone series (no training-tail warm
    /// start; the series supplies its own history).
    pub fn predict_fresh(
        &self,
        ds: &WindowedDataset,
    ) -> anyhow::Result<(Vec<f64>, Option<Vec<WeightTriple>>)> {
        match self {
            TrainedModel::Ensemble(m) => {
                let (preds, weights) = predict_ensemble_fresh(m, ds)?;
                Ok((preds, Some(weights)))
            }
            other => other.predict_split(ds),
        }
    }

    fn model_json(&self) -> String {
        match self {
            TrainedModel::GbdtLeafwise(m) | TrainedModel::GbdtOblivious(m) => m.to_json(),
            TrainedModel::Lstm(m) => m.to_json(),
            TrainedModel::Ensemble(m) => m.to_json(),
        }
    }
}

/// Train one model row on the prepared training split.
pub fn train_model(
    kind: ModelKind,
    config: &RunConfig,
    train: &WindowedDataset,
) -> anyhow::Result<TrainedModel> {
    let seed = config.model_seed(kind);
    match kind {
        ModelKind::GbdtLeafwise => {
            let cfg = BoostConfig { seed, ..config.gbdt_leafwise.clone() };
            let model = fit_gbdt(&train.flat_columns(), train.targets(), &cfg)?;
            Ok(TrainedModel::GbdtLeafwise(model))
        }
        ModelKind::GbdtOblivious => {
            let cfg = BoostConfig { seed, ..config.gbdt_oblivious.clone() };
            let model = fit_gbdt(&train.flat_columns(), train.targets(), &cfg)?;
            Ok(TrainedModel::GbdtOblivious(model))
        }
        ModelKind::Lstm => {
            let cfg = LstmConfig { seed, ..config.lstm.clone() };
            Ok(TrainedModel::Lstm(fit_lstm(train, &cfg)?))
        }
        ModelKind::Ensemble => {
            let cfg = config.ensemble_config();
            Ok(TrainedModel::Ensemble(Box::new(fit_ensemble(train, &cfg)?)))
        }
    }
}

// --- model file format --------------------------------------------------

const FORMAT_VERSION: u32 = 1;
const KIND: &str = "stackcast-model";

#[derive(Serialize, Deserialize)]
struct SavedModelDoc {
    format_version: u32,
    kind: String,
    model_kind: String,
    pipeline: PipelineMeta,
    model: serde_json::Value,
}

/// Serialize a model plus its preprocessing pipeline into one document.
pub fn save_model(model: &TrainedModel, meta: &PipelineMeta) -> String {
    let doc = SavedModelDoc {
        format_version: FORMAT_VERSION,
        kind: KIND.to_string(),
        model_kind: model.kind().name().to_string(),
        pipeline: meta.clone(),
        model: serde_json::from_str(&model.model_json()).expect("model docs are valid JSON"),
    };
    serde_json::to_string_pretty(&doc).expect("saved model serializes")
}

/// Parse a saved model document back into the model and its pipeline.
pub fn load_model(text: &str) -> anyhow::Result<(TrainedModel, PipelineMeta)> {
    let doc: SavedModelDoc = serde_json::from_str(text).context("parsing model document")?;
    if doc.kind != KIND {
        bail!("document kind `{}` is not `{KIND}`", doc.kind);
    }
    if doc.format_version != FORMAT_VERSION {
        bail!("unsupported model format_version {}", doc.format_version);
    }
    let inner = serde_json::to_string(&doc.model).expect("sub-document re-serializes");
    let model = match ModelKind::parse(&doc.model_kind)? {
        ModelKind::GbdtLeafwise => TrainedModel::GbdtLeafwise(GbdtModel::from_json(&inner)?),
        ModelKind::GbdtOblivious => TrainedModel::GbdtOblivious(GbdtModel::from_json(&inner)?),
        ModelKind::Lstm => TrainedModel::Lstm(LstmModel::from_json(&inner)?),
        ModelKind::Ensemble => {
            TrainedModel::Ensemble(Box::new(EnsembleModel::from_json(&inner)?))
        }
    };
    Ok((model, doc.pipeline))
}
