use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use stackcast::ensemble::EnsembleConfig;
use stackcast::gbdt::BoostConfig;
use stackcast::lstm::LstmConfig;
use stackcast::dataframe::MissingPolicy;
use stackcast::seeding::derive_seed;

use crate::synth::SyntheticSpec;
use crate::AppError;

pub const CONFIG_VERSION: u32 = 1;

/// Where the run's rows come from. Exactly one source per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Path to a `date,open,high,low,close,volume` CSV.
    Csv(PathBuf),
    /// Seeded synthetic series generated into the output directory.
    Synthetic(SyntheticSpec),
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic(SyntheticSpec::default())
    }
}

fn default_schema() -> Vec<String> {
    ["date", "open", "high", "low", "close", "volume"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn default_version() -> u32 {
    CONFIG_VERSION
}
fn default_seed() -> u64 {
    42
}
fn default_lookback() -> usize {
    20
}
fn default_train_fraction() -> f64 {
    0.8
}
fn default_target() -> String {
    "close".to_string()
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_model() -> String {
    "ensemble".to_string()
}
fn default_models() -> Vec<String> {
    vec![
        "gbdt-oblivious".into(),
        "gbdt-leafwise".into(),
        "lstm".into(),
        "ensemble".into(),
    ]
}
fn default_k_folds() -> usize {
    5
}

/// Full run configuration. File values are overridden by CLI flags; the
/// per-model `seed` fields are always re-derived from the top-level seed so
/// one seed controls the whole run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    pub data: DataSource,
    /// Columns loaded from the CSV (must include `date` and the target);
    /// all non-date columns feed the models.
    pub schema: Vec<String>,
    pub target: String,
    pub missing_policy: MissingPolicy,
    pub lookback: usize,
    pub train_fraction: f64,
    pub out_dir: PathBuf,
    /// Model trained by `train`.
    pub model: String,
    /// Models compared by `compare` (the ensemble is always included).
    pub models: Vec<String>,
    pub gbdt_leafwise: BoostConfig,
    pub gbdt_oblivious: BoostConfig,
    pub lstm: LstmConfig,
    pub meta: LstmConfig,
    pub k_folds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ensemble_defaults = EnsembleConfig::default();
        Self {
            version: default_version(),
            seed: default_seed(),
            data: DataSource::default(),
            schema: default_schema(),
            target: default_target(),
            missing_policy: MissingPolicy::default(),
            lookback: default_lookback(),
            train_fraction: default_train_fraction(),
            out_dir: default_out_dir(),
            model: default_model(),
            models: default_models(),
            gbdt_leafwise: ensemble_defaults.lightgbm,
            gbdt_oblivious: ensemble_defaults.catboost,
            lstm: ensemble_defaults.lstm,
            meta: ensemble_defaults.meta,
            k_folds: default_k_folds(),
        }
    }
}

/// Flag overrides shared by `train` and `compare`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub lookback: Option<usize>,
    pub train_fraction: Option<f64>,
    pub model: Option<String>,
    pub models: Option<Vec<String>>,
}

impl RunConfig {
    /// Load from JSON, or start from defaults when no file is given.
    pub fn load(path: Option<&Path>) -> Result<Self, AppError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    AppError::Config(format!("cannot read {}: {e}", p.display()))
                })?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| AppError::Config(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        if config.version != CONFIG_VERSION {
            return Err(AppError::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                config.version
            )));
        }
        config.meta.n_layers = 2;
        Ok(config)
    }

    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(seed) = ov.seed {
            self.seed = seed;
        }
        if let Some(out) = &ov.out {
            self.out_dir = out.clone();
        }
        if let Some(data) = &ov.data {
            self.data = DataSource::Csv(data.clone());
        }
        if let Some(lookback) = ov.lookback {
            self.lookback = lookback;
        }
        if let Some(frac) = ov.train_fraction {
            self.train_fraction = frac;
        }
        if let Some(model) = &ov.model {
            self.model = model.clone();
        }
        if let Some(models) = &ov.models {
            self.models = models.clone();
        }
    }

    pub fn validate(&self) -> Result<(), AppError> {
        if self.lookback == 0 {
            return Err(AppError::Config("lookback must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(AppError::Config("train-fraction must lie in (0, 1)".into()));
        }
        if !self.schema.iter().any(|c| c == "date") {
            return Err(AppError::Config("schema must include the `date` column".into()));
        }
        if !self.schema.iter().any(|c| *c == self.target) {
            return Err(AppError::Config(format!(
                "target `{}` must appear in the schema",
                self.target
            )));
        }
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate(self.lookback).map_err(AppError::Config)?;
        }
        if self.k_folds < 2 {
            return Err(AppError::Config("k_folds must be at least 2".into()));
        }
        Ok(())
    }

    /// Ensemble config with per-fold seeds derived from the run seed.
    pub fn ensemble_config(&self) -> EnsembleConfig {
        EnsembleConfig {
            catboost: self.gbdt_oblivious.clone(),
            lightgbm: self.gbdt_leafwise.clone(),
            lstm: self.lstm.clone(),
            meta: LstmConfig { n_layers: 2, ..self.meta.clone() },
            k_folds: self.k_folds,
            seed: self.seed,
        }
    }

    /// Seed stream tags per standalone model row.
    pub fn model_seed(&self, kind: crate::pipeline::ModelKind) -> u64 {
        use crate::pipeline::ModelKind::*;
        match kind {
            GbdtLeafwise => derive_seed(self.seed, 11),
            GbdtOblivious => derive_seed(self.seed, 12),
            Lstm => derive_seed(self.seed, 13),
            Ensemble => self.seed,
        }
    }

    /// Hash of the resolved configuration; manifests carry it so reruns can
    /// be matched to their exact settings.
    pub fn config_hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}
