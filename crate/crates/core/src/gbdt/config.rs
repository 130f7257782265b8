use serde::{Deserialize, Serialize};

use super::GbdtError;

/// Tree growth strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeMode {
    /// Best-first growth: always split the leaf with the highest gain.
    Leafwise,
    /// Every node at a level shares one (feature, threshold).
    Oblivious,
}

/// Gradient-based one-side sampling parameters.
///
/// Keeps the top `top_rate` fraction of samples by |gradient| and a uniform
/// `other_rate` fraction of the rest, reweighted so gradient sums stay
/// unbiased.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GossConfig {
    pub top_rate: f64,
    pub other_rate: f64,
}

impl GossConfig {
    pub fn new(top_rate: f64, other_rate: f64) -> Result<Self, GbdtError> {
        let cfg = Self { top_rate, other_rate };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GbdtError> {
        if !(self.top_rate > 0.0 && self.top_rate < 1.0) {
            return Err(GbdtError::ConfigInvalid("GOSS top_rate must lie in (0,1)".into()));
        }
        if !(self.other_rate > 0.0 && self.other_rate < 1.0) {
            return Err(GbdtError::ConfigInvalid("GOSS other_rate must lie in (0,1)".into()));
        }
        if self.top_rate + self.other_rate > 1.0 {
            return Err(GbdtError::ConfigInvalid(
                "GOSS top_rate + other_rate must not exceed 1".into(),
            ));
        }
        Ok(())
    }

    /// Weight applied to sampled small-gradient instances: `(1 - a) / b`.
    pub fn amplification(&self) -> f64 {
        (1.0 - self.top_rate) / self.other_rate
    }
}

/// Exclusive feature bundling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfbConfig {
    /// Max rows on which any two bundled features may both be nonzero.
    pub conflict_budget: usize,
}

impl Default for EfbConfig {
    fn default() -> Self {
        Self { conflict_budget: 0 }
    }
}

/// Boosting hyperparameters for both growth modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoostConfig {
    pub n_iterations: usize,
    /// Shrinkage applied to every tree's contribution; in (0, 1].
    pub learning_rate: f64,
    /// L2 penalty on leaf values.
    pub lambda: f64,
    /// Per-leaf complexity penalty subtracted from each split gain.
    pub gamma: f64,
    /// Leaf budget in leaf-wise mode.
    pub max_leaves: usize,
    /// Level budget in oblivious mode.
    pub depth: usize,
    pub n_bins: usize,
    pub min_samples_leaf: usize,
    pub goss: Option<GossConfig>,
    /// Iterations trained on all samples before GOSS kicks in.
    pub goss_warmup: usize,
    pub efb: Option<EfbConfig>,
    pub mode: TreeMode,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            n_iterations: 100,
            learning_rate: 0.1,
            lambda: 1.0,
            gamma: 0.0,
            max_leaves: 31,
            depth: 6,
            n_bins: 256,
            min_samples_leaf: 1,
            goss: None,
            goss_warmup: 0,
            efb: None,
            mode: TreeMode::Leafwise,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<(), GbdtError> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(GbdtError::ConfigInvalid("learning_rate must lie in (0,1]".into()));
        }
        if self.lambda < 0.0 || self.gamma < 0.0 {
            return Err(GbdtError::ConfigInvalid("lambda and gamma must be nonnegative".into()));
        }
        if self.n_bins < 2 || self.n_bins > u16::MAX as usize {
            return Err(GbdtError::ConfigInvalid("n_bins must lie in [2, 65535]".into()));
        }
        if self.max_leaves < 2 {
            return Err(GbdtError::ConfigInvalid("max_leaves must be at least 2".into()));
        }
        if self.depth == 0 {
            return Err(GbdtError::ConfigInvalid("depth must be at least 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(GbdtError::ConfigInvalid("min_samples_leaf must be at least 1".into()));
        }
        if let Some(goss) = &self.goss {
            goss.validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplification_matches_formula() {
        let goss = GossConfig::new(0.2, 0.1).unwrap();
        assert_eq!(goss.amplification(), (1.0 - 0.2) / 0.1);
        assert!((goss.amplification() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(GossConfig::new(0.0, 0.1).is_err());
        assert!(GossConfig::new(0.6, 0.5).is_err());
        assert!(GossConfig::new(0.2, 1.0).is_err());
    }

    #[test]
    fn rejects_bad_boost_config() {
        let mut cfg = BoostConfig::default();
        cfg.learning_rate = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = BoostConfig::default();
        cfg.n_bins = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = BoostConfig::default();
        cfg.max_leaves = 1;
        assert!(cfg.validate().is_err());
        assert!(BoostConfig::default().validate().is_ok());
    }
}
