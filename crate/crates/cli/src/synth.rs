use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Parameters of the deterministic synthetic OHLCV series: a linear trend,
/// a sine cycle, Gaussian noise on the close, and seeded perturbations for
/// the remaining columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_points: usize,
    /// Close-price slope per step.
    pub trend: f64,
    pub amplitude: f64,
    /// Sine period in steps.
    pub period: f64,
    pub noise_std: f64,
    /// Constant offset of the close series.
    pub base: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_points: 500,
            trend: 0.02,
            amplitude: 10.0,
            period: 40.0,
            noise_std: 0.5,
            base: 100.0,
            seed: 42,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self, lookback: usize) -> Result<(), String> {
        if self.n_points <= lookback + 10 {
            return Err(format!(
                "synthetic n_points ({}) must exceed lookback + 10 ({})",
                self.n_points,
                lookback + 10
            ));
        }
        if self.period <= 0.0 {
            return Err("synthetic period must be positive".into());
        }
        if self.noise_std < 0.0 {
            return Err("synthetic noise_std must be nonnegative".into());
        }
        Ok(())
    }
}

/// `sin(2π t / period)` with exact values at quarter periods.
///
/// Library sine returns ~1e-16 residue at multiples of π; quarter-period
/// points are resolved from a table so zero-noise fixtures cycle through
/// {0, 1, 0, -1} exactly.
pub fn sin_cycle(t: f64, period: f64) -> f64 {
    let phase = (t / period).rem_euclid(1.0);
    let quarters = phase * 4.0;
    if quarters == quarters.floor() {
        match quarters as usize % 4 {
            0 => 0.0,
            1 => 1.0,
            2 => 0.0,
            _ => -1.0,
        }
    } else {
        (std::f64::consts::TAU * phase).sin()
    }
}

/// Standard normal via Box-Muller; two uniform draws per sample.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Render the synthetic series as CSV text.
///
/// `close_t = base + trend * t + amplitude * sin(2π t / period) + noise`;
/// open/high/low are small deterministic perturbations of the close and
/// volume is a positive pseudo-random series. Fully seeded: identical specs
/// produce identical files.
pub fn synthetic_csv(spec: &SyntheticSpec) -> String {
    let mut rng = stackcast::seeding::seeded_rng(spec.seed);
    let start = chrono::NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid epoch");
    let mut out = String::with_capacity(spec.n_points * 64);
    out.push_str("date,open,high,low,close,volume\n");
    for t in 0..spec.n_points {
        let close = spec.base
            + spec.trend * t as f64
            + spec.amplitude * sin_cycle(t as f64, spec.period)
            + spec.noise_std * gaussian(&mut rng);
        let open = close * (1.0 + 0.004 * (rng.gen_range(0.0..1.0) - 0.5));
        let high = open.max(close) * (1.0 + 0.003 * rng.gen_range(0.0..1.0));
        let low = open.min(close) * (1.0 - 0.003 * rng.gen_range(0.0..1.0));
        let volume = 1.0e6 * (0.5 + rng.gen_range(0.0..1.0));
        let date = start + chrono::Duration::days(t as i64);
        writeln!(out, "{date},{open},{high},{low},{close},{volume}").expect("string write");
    }
    out
}

/// Generate and write the CSV; returns the rendered text.
pub fn gen_synthetic(spec: &SyntheticSpec, path: &Path) -> std::io::Result<String> {
    let text = synthetic_csv(spec);
    crate::manifest::write_atomic(path, text.as_bytes())?;
    Ok(text)
}
