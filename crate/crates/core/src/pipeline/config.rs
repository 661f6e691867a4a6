use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mcmc::ChainSettings;

/// What to do with negative mean-width samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositivityPolicy {
    /// Set them to zero and count them.
    #[default]
    Clamp,
    /// Drop them and count them.
    Reject,
}

impl std::str::FromStr for PositivityPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clamp" => Ok(Self::Clamp),
            "reject" => Ok(Self::Reject),
            other => Err(Error::usage(format!("unknown positivity policy '{other}' (expected clamp or reject)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Stage-1 realizations `J`.
    pub realizations: usize,
    /// Mean-width samples `J_z`.
    pub gamma_samples: usize,
    /// FFT truncation length `P`.
    pub truncation: usize,
    pub stage1: ChainSettings,
    pub stage2: ChainSettings,
    /// Wavenumber interval to crop to, in either order.
    pub region: Option<(f64, f64)>,
    pub seed: u64,
    pub positivity: PositivityPolicy,
    /// Draws used for the pointwise width curve; 0 disables it.
    pub curve_draws: usize,
    pub execution: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            realizations: 50,
            gamma_samples: 5000,
            truncation: 30,
            stage1: ChainSettings::default(),
            stage2: ChainSettings::default(),
            region: None,
            seed: 0,
            positivity: PositivityPolicy::default(),
            curve_draws: 0,
            execution: Execution::default(),
        }
    }
}

impl PipelineConfig {
    /// Long chains: 50000 iterations with 25000 burn-in for both stages.
    pub fn full_length() -> Self {
        Self {
            stage1: ChainSettings::with_length(50_000, 25_000),
            stage2: ChainSettings::with_length(50_000, 25_000),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations < 2 {
            return Err(Error::usage(format!("need at least 2 realizations, got {}", self.realizations)));
        }
        if self.gamma_samples < 100 {
            return Err(Error::usage(format!("need at least 100 mean-width samples, got {}", self.gamma_samples)));
        }
        if self.truncation < 4 {
            return Err(Error::usage(format!("truncation length must be at least 4, got {}", self.truncation)));
        }
        self.stage1.validate()?;
        self.stage2.validate()?;
        if let Some((a, b)) = self.region {
            if !a.is_finite() || !b.is_finite() || a == b {
                return Err(Error::usage(format!("invalid region {a}:{b}")));
            }
        }
        Ok(())
    }
}
