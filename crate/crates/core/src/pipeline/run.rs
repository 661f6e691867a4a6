use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{PipelineConfig, PositivityPolicy};
use crate::error::{Error, Result};
use crate::fourier::{build_dataset, gamma_curve, gamma_estimate_from_point, FourierDataset, GammaCurve};
use crate::gp::{sample_joint, toeplitz, GpFit, JointPrediction, ReplicatedGp, Stage1Hyper, Stage2Hyper};
use crate::lineshape::Spectrum;
use crate::mcmc::{dram_run, log_prior, select_indices, thin_and_select, Chain, DramConfig, PriorSpec};
use crate::rng::{derive_seed, sub_rng, Stream};
use crate::stats::{mean, std_dev};

/// Mean-width posterior samples and bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPosterior {
    /// Accepted samples, all `>= 0`.
    pub samples: Vec<f64>,
    /// Draws not returned: `Z(0) <= 0`, or negative under the reject policy.
    pub rejected: usize,
    /// Negative draws set to zero under the clamp policy.
    pub clamped: usize,
    /// Draws with `Z(0) <= 0` (included in `rejected`).
    pub nonpositive_value: usize,
    /// Smallest per-parameter effective sample size of the stage-2 chain.
    pub stage2_ess: f64,
    pub config: PipelineConfig,
}

impl GammaPosterior {
    pub fn mean(&self) -> f64 {
        mean(&self.samples)
    }

    /// Central 95% interval.
    pub fn interval(&self) -> (f64, f64) {
        crate::stats::central_interval(&self.samples, 0.95)
    }
}

#[derive(Clone, Debug)]
pub struct Stage1Output {
    pub chain: Chain,
    /// Selected hyperparameter draws, one per realization.
    pub selected: Vec<Stage1Hyper>,
    /// Noisy realizations on the spectrum grid.
    pub realizations: Vec<Vec<f64>>,
    /// Spectrum the stage ran on (after cropping).
    pub spectrum: Spectrum,
}

#[derive(Clone, Debug)]
pub struct Stage2Output {
    pub chain: Chain,
    pub posterior: GammaPosterior,
    pub curve: Option<GammaCurve>,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub stage1: Stage1Output,
    pub dataset: FourierDataset,
    pub stage2: Stage2Output,
}

impl PipelineOutput {
    pub fn posterior(&self) -> &GammaPosterior {
        &self.stage2.posterior
    }
}

/// Starting point for the spectrum GP: data mean and std, a tenth of the
/// span, and 5% of the std as noise.
pub fn stage1_initial(spectrum: &Spectrum) -> Vec<f64> {
    let s = spectrum.intensities();
    let sd = std_dev(s).max(f64::MIN_POSITIVE);
    let m = mean(s);
    let alpha = if m > 0.0 { m } else { 1e-3 * sd };
    vec![alpha, sd, spectrum.span() / 10.0, 0.05 * sd]
}

/// Starting point for the Fourier GP: mean `Z(0)`, log-slope over the first
/// five bins, std of `Z`, a third of the largest frequency, and 1% of the
/// largest magnitude as noise.
pub fn stage2_initial(dataset: &FourierDataset) -> Vec<f64> {
    let blocks = dataset.blocks();
    let xi = dataset.xi();
    let mean_z: Vec<f64> = (0..dataset.p)
        .map(|k| blocks.iter().map(|b| b[k]).sum::<f64>() / dataset.j as f64)
        .collect();
    let k = dataset.p.min(5);
    let xs = &xi[..k];
    let ys: Vec<f64> = mean_z[..k].iter().map(|z| z.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = mean(xs);
    let my = mean(&ys);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let beta1 = sxy / sxx;
    let max_z = dataset.max_magnitude();
    let sigma_c = std_dev(&dataset.magnitudes).max(1e-12 * max_z.max(f64::MIN_POSITIVE));
    let beta0 = mean_z[0].clamp(1e-6 * max_z, 9.99 * max_z);
    vec![beta0, beta1, sigma_c, dataset.xi_max() / 3.0, 0.01 * max_z]
}

/// A likelihood evaluation that cannot be factored is treated as zero
/// density so the sampler simply rejects the proposal.
fn zero_if_ill_conditioned(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::IllConditioned { .. }) => Ok(f64::NEG_INFINITY),
        other => other,
    }
}

fn crop(spectrum: &Spectrum, config: &PipelineConfig) -> Result<Spectrum> {
    match config.region {
        Some((a, b)) => spectrum.crop(a, b),
        None => Ok(spectrum.clone()),
    }
}

/// Fit the spectrum GP and draw `J` noisy realizations on the data grid.
pub fn run_stage1(spectrum: &Spectrum, config: &PipelineConfig) -> Result<Stage1Output> {
    config.validate()?;
    let spectrum = crop(spectrum, config)?;
    let grid = spectrum.grid();
    let y = spectrum.intensities();
    let prior = PriorSpec::stage1(spectrum.span())?;
    let init = stage1_initial(&spectrum);
    let target = |theta: &[f64]| {
        if log_prior(theta, &prior) == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let h = Stage1Hyper::from_slice(theta);
        zero_if_ill_conditioned(toeplitz::log_likelihood(grid, y, &h.kernel(), h.sigma_eps, &h.mean()))
    };
    let dram = DramConfig::scaled_to(config.stage1, &init, derive_seed(config.seed, Stream::Stage1Chain, 0));
    let mut chain = dram_run(target, &dram, &init).map_err(|e| e.in_stage("stage 1 sampling"))?;
    chain.names = Stage1Hyper::NAMES.iter().map(|s| s.to_string()).collect();

    let selected: Vec<Stage1Hyper> = thin_and_select(
        &chain,
        config.realizations,
        derive_seed(config.seed, Stream::Stage1Select, 0),
    )?
    .iter()
    .map(|t| Stage1Hyper::from_slice(t))
    .collect();

    let realizations = config
        .execution
        .try_map_range(config.realizations, |j| {
            let h = selected[j];
            let fit = GpFit::new(grid.to_vec(), y.to_vec(), h.kernel(), h.sigma_eps, h.mean())?;
            let mut rng = sub_rng(config.seed, Stream::Realization, j as u64);
            Ok(fit.sample_realization(grid, h.sigma_eps, &mut rng)?.as_slice().to_vec())
        })
        .map_err(|e| e.in_stage("stage 1 realizations"))?;

    Ok(Stage1Output {
        chain,
        selected,
        realizations,
        spectrum,
    })
}

fn stage2_fit(dataset: &FourierDataset, blocks: &[Vec<f64>], h: &Stage2Hyper) -> Result<ReplicatedGp<crate::gp::ExponentialMean>> {
    ReplicatedGp::new(dataset.xi().to_vec(), blocks, h.kernel(), h.sigma_z, h.mean())
}

/// Fit the Fourier GP to `dataset` and draw mean-width samples.
pub fn run_stage2(dataset: &FourierDataset, config: &PipelineConfig) -> Result<Stage2Output> {
    config.validate()?;
    let blocks = dataset.blocks();
    let max_z = dataset.max_magnitude();
    let prior = PriorSpec::stage2(max_z, dataset.xi_max()).map_err(|e| e.in_stage("stage 2 prior"))?;
    let init = stage2_initial(dataset);
    let target = |theta: &[f64]| {
        if log_prior(theta, &prior) == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        let h = Stage2Hyper::from_slice(theta);
        zero_if_ill_conditioned(stage2_fit(dataset, &blocks, &h).map(|f| f.log_likelihood()))
    };
    let dram = DramConfig::scaled_to(config.stage2, &init, derive_seed(config.seed, Stream::Stage2Chain, 0));
    let mut chain = dram_run(target, &dram, &init).map_err(|e| e.in_stage("stage 2 sampling"))?;
    chain.names = Stage2Hyper::NAMES.iter().map(|s| s.to_string()).collect();

    let picks = select_indices(&chain, config.gamma_samples, derive_seed(config.seed, Stream::Stage2Select, 0))?;
    let curve_draws = config.curve_draws.min(config.gamma_samples);
    let xi = dataset.xi();

    // One joint prediction per distinct chain state.
    let mut distinct: Vec<usize> = picks.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let curve_states: std::collections::BTreeSet<usize> = picks[..curve_draws].iter().copied().collect();
    let predictions = config
        .execution
        .try_map_range(distinct.len(), |i| {
            let h = Stage2Hyper::from_slice(&chain.samples[distinct[i]]);
            let fit = stage2_fit(dataset, &blocks, &h)?;
            let at_zero = fit.joint_value_derivative(&[0.0]);
            let on_grid = curve_states
                .contains(&distinct[i])
                .then(|| fit.joint_value_derivative(xi));
            Ok((at_zero, on_grid))
        })
        .map_err(|e| e.in_stage("stage 2 prediction"))?;
    let cache: BTreeMap<usize, &(JointPrediction, Option<JointPrediction>)> =
        distinct.iter().copied().zip(predictions.iter()).collect();

    let draws = config
        .execution
        .try_map_range(picks.len(), |i| {
            let mut rng = sub_rng(config.seed, Stream::GammaDraw, i as u64);
            let (v, d) = sample_joint(&cache[&picks[i]].0, &mut rng)?;
            Ok(gamma_estimate_from_point(v[0], d[0]))
        })
        .map_err(|e| e.in_stage("stage 2 sampling of mean width"))?;

    let mut samples = Vec::with_capacity(draws.len());
    let (mut rejected, mut clamped, mut nonpositive) = (0, 0, 0);
    for g in draws {
        match g {
            None => {
                nonpositive += 1;
                rejected += 1;
            }
            Some(g) if g < 0.0 => match config.positivity {
                PositivityPolicy::Clamp => {
                    clamped += 1;
                    samples.push(0.0);
                }
                PositivityPolicy::Reject => rejected += 1,
            },
            Some(g) => samples.push(g),
        }
    }
    if samples.is_empty() {
        return Err(Error::EstimationFailed(config.gamma_samples).in_stage("stage 2"));
    }

    let curve = if curve_draws > 0 {
        let joint = config
            .execution
            .try_map_range(curve_draws, |i| {
                let mut rng = sub_rng(config.seed, Stream::CurveDraw, i as u64);
                let pred = cache[&picks[i]].1.as_ref().expect("grid prediction cached for curve draws");
                sample_joint(pred, &mut rng)
            })
            .map_err(|e| e.in_stage("width curve"))?;
        Some(gamma_curve(xi, &joint)?)
    } else {
        None
    };

    let stage2_ess = chain.effective_sample_sizes().into_iter().fold(f64::INFINITY, f64::min);
    Ok(Stage2Output {
        chain,
        posterior: GammaPosterior {
            samples,
            rejected,
            clamped,
            nonpositive_value: nonpositive,
            stage2_ess,
            config: config.clone(),
        },
        curve,
    })
}

/// Run both stages on `spectrum`.
pub fn run(spectrum: &Spectrum, config: &PipelineConfig) -> Result<PipelineOutput> {
    let stage1 = run_stage1(spectrum, config)?;
    let dataset = build_dataset(
        &stage1.realizations,
        stage1.spectrum.delta_nu(),
        config.truncation,
        config.execution,
    )
    .map_err(|e| e.in_stage("Fourier dataset"))?;
    let stage2 = run_stage2(&dataset, config)?;
    Ok(PipelineOutput {
        stage1,
        dataset,
        stage2,
    })
}

/// One row of a truncation scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub p: usize,
    pub mean: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub error: Option<String>,
}

/// Rerun stage 2 for each truncation length, reusing one stage-1 fit.
/// Failures are recorded per row.
pub fn sensitivity_scan(spectrum: &Spectrum, config: &PipelineConfig, p_values: &[usize]) -> Result<Vec<SensitivityRow>> {
    let stage1 = run_stage1(spectrum, config)?;
    let n = stage1.spectrum.len();
    if let Some(&p) = p_values.iter().find(|&&p| p > n) {
        return Err(Error::usage(format!("truncation length {p} exceeds spectrum length {n}")));
    }
    let p_max = p_values.iter().copied().max().unwrap_or(config.truncation).max(4);
    let full = build_dataset(&stage1.realizations, stage1.spectrum.delta_nu(), p_max, config.execution)?;
    Ok(p_values
        .iter()
        .map(|&p| {
            let outcome = full.truncated(p).and_then(|d| {
                let cfg = PipelineConfig {
                    truncation: p,
                    ..config.clone()
                };
                run_stage2(&d, &cfg)
            });
            match outcome {
                Ok(out) => {
                    let (lo, hi) = out.posterior.interval();
                    SensitivityRow {
                        p,
                        mean: Some(out.posterior.mean()),
                        lower: Some(lo),
                        upper: Some(hi),
                        error: None,
                    }
                }
                Err(e) => SensitivityRow {
                    p,
                    mean: None,
                    lower: None,
                    upper: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}
