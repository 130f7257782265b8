use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stackcast_cli::commands::{cmd_compare, cmd_gen_synthetic, cmd_predict, cmd_train};
use stackcast_cli::config::{Overrides, RunConfig};
use stackcast_cli::AppError;

/// Hybrid time-series forecasting: boosted trees, an LSTM, and an
/// LSTM-weighted stacking ensemble.
#[derive(Parser)]
#[command(name = "stackcast", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// JSON run configuration; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for the whole run.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input CSV (date,open,high,low,close,volume).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Input window length in rows.
    #[arg(long)]
    lookback: Option<usize>,
    /// Fraction of windows used for training, in (0, 1).
    #[arg(long)]
    train_fraction: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            data: self.data.clone(),
            lookback: self.lookback,
            train_fraction: self.train_fraction,
            model: None,
            models: None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write its document, predictions, and manifest.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// gbdt-leafwise | gbdt-oblivious | lstm | ensemble
        #[arg(long)]
        model: Option<String>,
    },
    /// Predict every forecastable timestep of a data file with a saved model.
    Predict {
        /// Saved model document produced by `train` or `compare`.
        #[arg(long)]
        model_file: PathBuf,
        /// Input CSV matching the model's training schema.
        #[arg(long)]
        data: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Train the listed models plus the ensemble on one split and emit a
    /// metrics table sorted by R².
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated model list.
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<String>>,
    },
    /// Generate the seeded synthetic OHLCV benchmark CSV.
    GenSynthetic {
        #[command(flatten)]
        common: CommonArgs,
        /// Output file (defaults to <out>/synthetic.csv).
        #[arg(long)]
        out_file: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Train { common, model } => {
            let mut overrides = common.overrides();
            overrides.model = model;
            let mut config = RunConfig::load(common.config.as_deref())?;
            config.apply_overrides(&overrides);
            cmd_train(&config)
        }
        Command::Predict { model_file, data, out } => cmd_predict(&model_file, &data, &out),
        Command::Compare { common, models } => {
            let mut overrides = common.overrides();
            overrides.models = models;
            let mut config = RunConfig::load(common.config.as_deref())?;
            config.apply_overrides(&overrides);
            cmd_compare(&config)
        }
        Command::GenSynthetic { common, out_file } => {
            let overrides = common.overrides();
            let mut config = RunConfig::load(common.config.as_deref())?;
            config.apply_overrides(&overrides);
            cmd_gen_synthetic(&config, out_file.as_deref(), &overrides)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
