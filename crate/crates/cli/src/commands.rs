use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use chrono::NaiveDate;

use stackcast::dataframe::invert_scaler;
use stackcast::ensemble::WeightTriple;
use stackcast::metrics::{build_report, MetricsReport, REPORT_CSV_HEADER};

use crate::config::{DataSource, Overrides, RunConfig};
use crate::manifest::{write_atomic, RunManifest, Stopwatch};
use crate::pipeline::{
    load_model, prepare, prepare_for_predict, save_model, train_model, ModelKind, PipelineMeta,
    PreparedData,
};
use crate::synth::{gen_synthetic, SyntheticSpec};
use crate::AppError;

/// Materialize the configured data source, generating the synthetic CSV
/// into the output directory when needed.
fn resolve_data(config: &RunConfig) -> Result<PathBuf, AppError> {
    match &config.data {
        DataSource::Csv(path) => {
            if !path.exists() {
                return Err(AppError::Runtime(anyhow!(
                    "data file not found: {}",
                    path.display()
                )));
            }
            Ok(path.clone())
        }
        DataSource::Synthetic(spec) => {
            let path = config.out_dir.join("synthetic.csv");
            gen_synthetic(spec, &path)
                .with_context(|| format!("writing {}", path.display()))?;
            Ok(path)
        }
    }
}

fn pipeline_meta(config: &RunConfig, prepared: &PreparedData) -> PipelineMeta {
    PipelineMeta {
        schema: config.schema.clone(),
        target: config.target.clone(),
        lookback: config.lookback,
        train_fraction: config.train_fraction,
        missing_policy: config.missing_policy,
        scaler: prepared.scaler.clone(),
    }
}

fn predictions_csv(
    dates: &[NaiveDate],
    actual: &[f64],
    predicted: &[f64],
    weights: Option<&[WeightTriple]>,
) -> String {
    let mut out = String::new();
    match weights {
        Some(_) => out.push_str("date,actual,predicted,alpha,beta,gamma\n"),
        None => out.push_str("date,actual,predicted\n"),
    }
    for i in 0..dates.len() {
        match weights {
            Some(w) => writeln!(
                out,
                "{},{},{},{},{},{}",
                dates[i], actual[i], predicted[i], w[i].alpha, w[i].beta, w[i].gamma
            )
            .expect("string write"),
            None => writeln!(out, "{},{},{}", dates[i], actual[i], predicted[i])
                .expect("string write"),
        }
    }
    out
}

fn weights_csv(dates: &[NaiveDate], weights: &[WeightTriple]) -> String {
    let mut out = String::from("date,alpha,beta,gamma\n");
    for (d, w) in dates.iter().zip(weights) {
        writeln!(out, "{},{},{},{}", d, w.alpha, w.beta, w.gamma).expect("string write");
    }
    out
}

fn report_to_json(report: &MetricsReport) -> serde_json::Value {
    serde_json::json!({
        "model": report.model_name,
        "r2": report.r2,
        "mae": report.mae,
        "mse": report.mse,
        "rmse": report.rmse,
        "n": report.n,
    })
}

/// `train`: run the pipeline end to end for one model, write the model
/// document, test-split predictions, and a run manifest.
pub fn cmd_train(config: &RunConfig) -> Result<(), AppError> {
    config.validate()?;
    let kind = ModelKind::parse(&config.model).map_err(|e| AppError::Config(e.to_string()))?;
    let watch = Stopwatch::start();

    let csv = resolve_data(config)?;
    let prepared = prepare(config, &csv)?;
    let model = train_model(kind, config, &prepared.train)?;
    let (preds, weights) = model.predict_split(&prepared.test)?;

    let report = build_report(
        &preds,
        prepared.test.targets(),
        kind.name(),
        &prepared.scaler,
        &config.target,
    )?;

    let meta = pipeline_meta(config, &prepared);
    let model_path = config.out_dir.join(format!("{}.model.json", kind.name()));
    write_atomic(&model_path, save_model(&model, &meta).as_bytes())?;

    let pred_prices = invert_scaler(&preds, &prepared.scaler, &config.target)?;
    let actual_prices =
        invert_scaler(prepared.test.targets(), &prepared.scaler, &config.target)?;
    let pred_path = config.out_dir.join("predictions.csv");
    write_atomic(
        &pred_path,
        predictions_csv(
            prepared.test.sample_timestamps(),
            &actual_prices,
            &pred_prices,
            weights.as_deref(),
        )
        .as_bytes(),
    )?;

    let mut manifest = RunManifest::new("train", config);
    manifest.results = serde_json::json!({
        "model": kind.name(),
        "metrics": report_to_json(&report),
        "n_train": prepared.train.n_samples(),
        "n_test": prepared.test.n_samples(),
    });
    manifest.outputs = vec![
        model_path.display().to_string(),
        pred_path.display().to_string(),
    ];
    manifest.timings.total_seconds = watch.seconds();
    manifest
        .timings
        .per_model_seconds
        .push((kind.name().to_string(), watch.seconds()));
    let manifest_path = config.out_dir.join("manifest.json");
    manifest.write(&manifest_path)?;

    println!(
        "trained {} on {} train / {} test samples",
        kind.name(),
        prepared.train.n_samples(),
        prepared.test.n_samples()
    );
    println!(
        "  r2 {:.4}  mae {:.4}  mse {:.4}  rmse {:.4}",
        report.r2, report.mae, report.mse, report.rmse
    );
    println!("  model: {}", model_path.display());
    println!("  manifest: {}", manifest_path.display());
    Ok(())
}

/// `predict`: load a saved model, run its pipeline on a data file, and
/// write one `date,actual,predicted` row per forecastable timestep.
pub fn cmd_predict(
    model_path: &Path,
    data_path: &Path,
    out_dir: &Path,
) -> Result<(), AppError> {
    let text = std::fs::read_to_string(model_path).map_err(|e| {
        AppError::Runtime(anyhow!("cannot read model file {}: {e}", model_path.display()))
    })?;
    let (model, meta) = load_model(&text)?;
    if !data_path.exists() {
        return Err(AppError::Runtime(anyhow!(
            "data file not found: {}",
            data_path.display()
        )));
    }
    let ds = prepare_for_predict(&meta, data_path)?;
    let (preds, weights) = model.predict_fresh(&ds)?;

    let pred_prices = invert_scaler(&preds, &meta.scaler, &meta.target)?;
    let actual_prices = invert_scaler(ds.targets(), &meta.scaler, &meta.target)?;
    let pred_path = out_dir.join("predictions.csv");
    write_atomic(
        &pred_path,
        predictions_csv(
            ds.sample_timestamps(),
            &actual_prices,
            &pred_prices,
            weights.as_deref(),
        )
        .as_bytes(),
    )?;
    if let Some(w) = &weights {
        let weights_path = out_dir.join("weights.csv");
        write_atomic(&weights_path, weights_csv(ds.sample_timestamps(), w).as_bytes())?;
        println!("  weight trace: {}", weights_path.display());
    }
    println!(
        "predicted {} steps with {}: {}",
        ds.n_samples(),
        model.kind().name(),
        pred_path.display()
    );
    Ok(())
}

enum CompareRow {
    Ok(MetricsReport),
    Failed { model: String, error: String },
}

impl CompareRow {
    fn r2(&self) -> Option<f64> {
        match self {
            CompareRow::Ok(r) => Some(r.r2),
            CompareRow::Failed { .. } => None,
        }
    }

    fn csv_row(&self) -> String {
        match self {
            CompareRow::Ok(r) => r.to_csv_row(),
            CompareRow::Failed { model, .. } => format!("{model},NA,NA,NA,NA,0"),
        }
    }

    fn json_row(&self) -> serde_json::Value {
        match self {
            CompareRow::Ok(r) => report_to_json(r),
            CompareRow::Failed { model, error } => {
                serde_json::json!({"model": model, "error": error})
            }
        }
    }
}

/// `compare`: train every listed model plus the ensemble on the identical
/// split and seed, then emit a metrics table sorted by R² descending.
pub fn cmd_compare(config: &RunConfig) -> Result<(), AppError> {
    config.validate()?;
    if config.models.len() < 2 {
        return Err(AppError::Config("compare needs at least 2 models".into()));
    }
    let mut kinds = Vec::new();
    for name in &config.models {
        let kind = ModelKind::parse(name).map_err(|e| AppError::Config(e.to_string()))?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    if !kinds.contains(&ModelKind::Ensemble) {
        kinds.push(ModelKind::Ensemble);
    }

    let watch = Stopwatch::start();
    let csv = resolve_data(config)?;
    let prepared = prepare(config, &csv)?;
    let meta = pipeline_meta(config, &prepared);

    let mut rows = Vec::new();
    let mut outputs = Vec::new();
    let mut per_model_seconds = Vec::new();
    for kind in &kinds {
        let model_watch = Stopwatch::start();
        let result = train_model(*kind, config, &prepared.train).and_then(|model| {
            let (preds, weights) = model.predict_split(&prepared.test)?;
            let report = build_report(
                &preds,
                prepared.test.targets(),
                kind.name(),
                &prepared.scaler,
                &config.target,
            )?;
            Ok((model, preds, weights, report))
        });
        per_model_seconds.push((kind.name().to_string(), model_watch.seconds()));
        match result {
            Ok((model, preds, weights, report)) => {
                let model_path = config.out_dir.join(format!("{}.model.json", kind.name()));
                write_atomic(&model_path, save_model(&model, &meta).as_bytes())?;
                outputs.push(model_path.display().to_string());

                let pred_prices = invert_scaler(&preds, &prepared.scaler, &config.target)?;
                let actual_prices =
                    invert_scaler(prepared.test.targets(), &prepared.scaler, &config.target)?;
                let pred_path = config
                    .out_dir
                    .join(format!("predictions_{}.csv", kind.name()));
                write_atomic(
                    &pred_path,
                    predictions_csv(
                        prepared.test.sample_timestamps(),
                        &actual_prices,
                        &pred_prices,
                        weights.as_deref(),
                    )
                    .as_bytes(),
                )?;
                outputs.push(pred_path.display().to_string());
                rows.push(CompareRow::Ok(report));
            }
            Err(err) => {
                eprintln!("model {} failed: {err:#}", kind.name());
                rows.push(CompareRow::Failed {
                    model: kind.name().to_string(),
                    error: format!("{err:#}"),
                });
            }
        }
    }

    // R² descending; failed rows sink to the bottom.
    rows.sort_by(|a, b| {
        b.r2()
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&a.r2().unwrap_or(f64::NEG_INFINITY))
    });

    let mut csv_text = String::from(REPORT_CSV_HEADER);
    csv_text.push('\n');
    for row in &rows {
        csv_text.push_str(&row.csv_row());
        csv_text.push('\n');
    }
    let report_csv_path = config.out_dir.join("report.csv");
    write_atomic(&report_csv_path, csv_text.as_bytes())?;
    outputs.push(report_csv_path.display().to_string());

    let json_rows: Vec<serde_json::Value> = rows.iter().map(|r| r.json_row()).collect();
    let report_json_path = config.out_dir.join("report.json");
    write_atomic(
        &report_json_path,
        serde_json::to_string_pretty(&json_rows)
            .expect("report serializes")
            .as_bytes(),
    )?;
    outputs.push(report_json_path.display().to_string());

    let improvement = improvement_summary(&rows);
    let mut manifest = RunManifest::new("compare", config);
    manifest.results = serde_json::json!({
        "rows": json_rows,
        "improvement": improvement,
        "n_train": prepared.train.n_samples(),
        "n_test": prepared.test.n_samples(),
    });
    manifest.outputs = outputs;
    manifest.timings.total_seconds = watch.seconds();
    manifest.timings.per_model_seconds = per_model_seconds;
    manifest.write(&config.out_dir.join("manifest.json"))?;

    println!("{REPORT_CSV_HEADER}");
    for row in &rows {
        println!("{}", row.csv_row());
    }
    Ok(())
}

/// Ensemble-vs-best-base deltas reported in the manifest.
fn improvement_summary(rows: &[CompareRow]) -> serde_json::Value {
    let ensemble = rows.iter().find_map(|r| match r {
        CompareRow::Ok(m) if m.model_name == "ensemble" => Some(m),
        _ => None,
    });
    let best_base = rows
        .iter()
        .filter_map(|r| match r {
            CompareRow::Ok(m) if m.model_name != "ensemble" => Some(m),
            _ => None,
        })
        .max_by(|a, b| a.r2.total_cmp(&b.r2));
    match (ensemble, best_base) {
        (Some(e), Some(b)) => serde_json::json!({
            "best_base_model": b.model_name,
            "best_base_r2": b.r2,
            "ensemble_r2": e.r2,
            "r2_delta": e.r2 - b.r2,
            "rmse_reduction_pct": 100.0 * (b.rmse - e.rmse) / b.rmse,
            "mae_reduction_pct": 100.0 * (b.mae - e.mae) / b.mae,
        }),
        _ => serde_json::Value::Null,
    }
}

/// `gen-synthetic`: write the seeded synthetic benchmark CSV.
pub fn cmd_gen_synthetic(
    config: &RunConfig,
    out_file: Option<&Path>,
    overrides: &Overrides,
) -> Result<(), AppError> {
    let mut spec = match &config.data {
        DataSource::Synthetic(spec) => spec.clone(),
        DataSource::Csv(_) => SyntheticSpec::default(),
    };
    if let Some(seed) = overrides.seed {
        spec.seed = seed;
    }
    spec.validate(config.lookback).map_err(AppError::Config)?;
    let path = match out_file {
        Some(p) => p.to_path_buf(),
        None => config.out_dir.join("synthetic.csv"),
    };
    gen_synthetic(&spec, &path).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {} rows to {}", spec.n_points, path.display());
    Ok(())
}
