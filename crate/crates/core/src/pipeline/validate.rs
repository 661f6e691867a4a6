use serde::{Deserialize, Serialize};

use super::{run, PipelineConfig};
use crate::error::{Error, Result};
use crate::lineshape::{Scenario, ScenarioKind};
use crate::rng::{derive_seed, Stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationRun {
    pub index: usize,
    pub noise_seed: u64,
    pub pipeline_seed: u64,
    pub mean: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub covered: bool,
    pub error: Option<String>,
}

/// Coverage of the true mean width over repeated noisy spectra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: ScenarioKind,
    pub true_gamma: f64,
    pub repeats: usize,
    pub covered: usize,
    pub coverage: f64,
    /// Mean 95% interval width over the runs that succeeded.
    pub mean_interval_width: f64,
    pub runs: Vec<ValidationRun>,
    pub config: PipelineConfig,
}

/// Synthesize `repeats` noisy spectra from `scenario` with distinct
/// sub-seeds of `config.seed`, run the estimator on each, and report how
/// often the 95% interval covers the true mean width. A failed run counts
/// as not covering.
pub fn validate_scenario(scenario: &Scenario, config: &PipelineConfig, repeats: usize) -> Result<ValidationReport> {
    if repeats == 0 {
        return Err(Error::usage("need at least one repeat"));
    }
    config.validate()?;
    let truth = scenario.true_mean_gamma();
    let runs = config.execution.try_map_range(repeats, |r| {
        let pipeline_seed = derive_seed(config.seed, Stream::Repeat, r as u64);
        let noise_seed = derive_seed(pipeline_seed, Stream::ScenarioNoise, 0);
        let spectrum = scenario.with_noise_seed(noise_seed).spectrum()?;
        let cfg = PipelineConfig {
            seed: pipeline_seed,
            ..config.clone()
        };
        let mut row = ValidationRun {
            index: r,
            noise_seed,
            pipeline_seed,
            mean: None,
            lower: None,
            upper: None,
            covered: false,
            error: None,
        };
        match run(&spectrum, &cfg) {
            Ok(out) => {
                let (lo, hi) = out.posterior().interval();
                row.mean = Some(out.posterior().mean());
                row.lower = Some(lo);
                row.upper = Some(hi);
                row.covered = lo <= truth && truth <= hi;
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        Ok(row)
    })?;
    let covered = runs.iter().filter(|r| r.covered).count();
    let widths: Vec<f64> = runs.iter().filter_map(|r| Some(r.upper? - r.lower?)).collect();
    Ok(ValidationReport {
        kind: scenario.kind,
        true_gamma: truth,
        repeats,
        covered,
        coverage: covered as f64 / repeats as f64,
        mean_interval_width: if widths.is_empty() {
            f64::NAN
        } else {
            widths.iter().sum::<f64>() / widths.len() as f64
        },
        runs,
        config: config.clone(),
    })
}
