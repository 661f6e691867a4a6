//! The two-stage estimator end to end.
//!
//! 1. Fit the spectrum GP by DRAM.
//! 2. Draw `J` noisy realizations, one per selected hyperparameter draw.
//! 3. Keep the first `P` FFT magnitude bins of each realization.
//! 4. Fit the Fourier-magnitude GP by DRAM.
//! 5. For each of `J_z` stage-2 draws, sample the joint value/derivative
//!    predictive at `xi = 0` and convert it to a mean-width sample.

mod config;
mod run;
mod validate;

pub use config::{PipelineConfig, PositivityPolicy};
pub use run::{
    run, run_stage1, run_stage2, sensitivity_scan, stage1_initial, stage2_initial, GammaPosterior, PipelineOutput,
    SensitivityRow, Stage1Output, Stage2Output,
};
pub use validate::{validate_scenario, ValidationReport, ValidationRun};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{central_interval, mean};

/// Minimum number of accepted samples for a summary.
pub const MIN_SUMMARY_SAMPLES: usize = 100;

/// Reported posterior summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub gamma_mean: f64,
    pub gamma_ci95: [f64; 2],
    pub accepted: usize,
    pub rejected: usize,
    pub clamped: usize,
    /// Smallest per-parameter effective sample size of the stage-2 chain.
    pub stage2_ess: f64,
}

/// Mean, central 95% interval, counts and stage-2 ESS of a posterior.
pub fn summarize(posterior: &GammaPosterior) -> Result<Summary> {
    if posterior.samples.len() < MIN_SUMMARY_SAMPLES {
        return Err(Error::usage(format!(
            "need at least {MIN_SUMMARY_SAMPLES} accepted samples to summarize, have {}",
            posterior.samples.len()
        )));
    }
    let (lo, hi) = central_interval(&posterior.samples, 0.95);
    Ok(Summary {
        gamma_mean: mean(&posterior.samples),
        gamma_ci95: [lo, hi],
        accepted: posterior.samples.len(),
        rejected: posterior.rejected,
        clamped: posterior.clamped,
        stage2_ess: posterior.stage2_ess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn posterior(samples: Vec<f64>) -> GammaPosterior {
        GammaPosterior {
            samples,
            rejected: 3,
            clamped: 1,
            nonpositive_value: 2,
            stage2_ess: 123.5,
            config: PipelineConfig::default(),
        }
    }

    #[test]
    fn constant_samples() {
        let s = summarize(&posterior(vec![4.25; 200])).unwrap();
        assert_eq!(s.gamma_mean, 4.25);
        assert_eq!(s.gamma_ci95, [4.25, 4.25]);
        assert_eq!((s.rejected, s.clamped, s.accepted), (3, 1, 200));
    }

    #[test]
    fn uniform_quantiles() {
        let mut rng = rng_from_seed(5);
        let s = summarize(&posterior((0..100_000).map(|_| rng.random::<f64>()).collect())).unwrap();
        assert!((s.gamma_ci95[0] - 0.025).abs() < 0.01);
        assert!((s.gamma_ci95[1] - 0.975).abs() < 0.01);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(summarize(&posterior(vec![1.0; 99])), Err(Error::Usage(_))));
    }

    #[test]
    fn json_round_trip() {
        let mut rng = rng_from_seed(6);
        let s = summarize(&posterior((0..500).map(|_| rng.random::<f64>() * 30.0).collect())).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: Summary = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }
}
