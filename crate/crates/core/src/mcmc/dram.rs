//! Delayed-rejection adaptive Metropolis.
//!
//! Each iteration proposes up to `dr_stages` Gaussian random-walk moves from
//! the current state; stage `k` uses the proposal covariance scaled by
//! `dr_scale^(2(k-1))`. A later stage is accepted with the delayed-rejection
//! probability computed recursively over the path of rejected proposals,
//! which keeps the target invariant. From `adaptation_start` on, every
//! `adaptation_interval` iterations the proposal covariance is reset to
//! `2.4²/d (cov + eps I)` of the chain history, with `eps = 1e-10 trace/d`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::tsv;
use crate::rng::rng_from_seed;

/// Chain length, burn-in and DR/adaptation schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSettings {
    pub chain_length: usize,
    pub burn_in: usize,
    pub dr_stages: usize,
    pub dr_scale: f64,
    pub adapt: bool,
    pub adaptation_start: usize,
    pub adaptation_interval: usize,
}

impl Default for ChainSettings {
    fn default() -> Self {
        Self {
            chain_length: 10_000,
            burn_in: 5_000,
            dr_stages: 3,
            dr_scale: 0.2,
            adapt: true,
            adaptation_start: 1000,
            adaptation_interval: 100,
        }
    }
}

impl ChainSettings {
    pub fn with_length(chain_length: usize, burn_in: usize) -> Self {
        Self {
            chain_length,
            burn_in,
            ..Self::default()
        }
    }

    /// Plain random-walk Metropolis: one stage, no adaptation.
    pub fn metropolis(chain_length: usize, burn_in: usize) -> Self {
        Self {
            chain_length,
            burn_in,
            dr_stages: 1,
            adapt: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.chain_length {
            return Err(Error::usage(format!(
                "burn-in ({}) must be shorter than the chain ({})",
                self.burn_in, self.chain_length
            )));
        }
        if self.dr_stages == 0 {
            return Err(Error::usage("need at least one delayed-rejection stage"));
        }
        if !(self.dr_scale > 0.0 && self.dr_scale <= 1.0) {
            return Err(Error::usage(format!("dr_scale must be in (0, 1], got {}", self.dr_scale)));
        }
        if self.adapt && self.adaptation_interval == 0 {
            return Err(Error::usage("adaptation interval must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DramConfig {
    pub settings: ChainSettings,
    /// Initial proposal covariance; must be symmetric positive definite.
    pub proposal_cov: DMatrix<f64>,
    pub seed: u64,
}

impl DramConfig {
    pub fn new(settings: ChainSettings, proposal_cov: DMatrix<f64>, seed: u64) -> Self {
        Self {
            settings,
            proposal_cov,
            seed,
        }
    }

    /// Diagonal proposal `(0.1 |x_i| + 1e-8)²` around `init`.
    pub fn scaled_to(settings: ChainSettings, init: &[f64], seed: u64) -> Self {
        let d = DVector::from_iterator(init.len(), init.iter().map(|x| (0.1 * x.abs() + 1e-8).powi(2)));
        Self::new(settings, DMatrix::from_diagonal(&d), seed)
    }
}

/// Output of [`dram_run`]. Row 0 is the initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub names: Vec<String>,
    pub samples: Vec<Vec<f64>>,
    pub log_posterior: Vec<f64>,
    pub burn_in: usize,
    /// Accepted proposals per DR stage.
    pub accepted: Vec<usize>,
    /// Proposals made per DR stage.
    pub attempted: Vec<usize>,
    /// Proposal covariance at the end of the run.
    pub proposal_cov: DMatrix<f64>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn post_burn_in(&self) -> &[Vec<f64>] {
        &self.samples[self.burn_in.min(self.len())..]
    }

    /// Post-burn-in trace of parameter `i`.
    pub fn trace(&self, i: usize) -> Vec<f64> {
        self.post_burn_in().iter().map(|s| s[i]).collect()
    }

    /// Fraction of proposals accepted at each stage.
    pub fn acceptance_rates(&self) -> Vec<f64> {
        self.accepted
            .iter()
            .zip(&self.attempted)
            .map(|(&a, &n)| if n == 0 { 0.0 } else { a as f64 / n as f64 })
            .collect()
    }

    /// Overall fraction of iterations that moved.
    pub fn acceptance_rate(&self) -> f64 {
        let moves: usize = self.accepted.iter().sum();
        moves as f64 / (self.len().saturating_sub(1)).max(1) as f64
    }

    /// Effective sample size of each parameter after burn-in.
    pub fn effective_sample_sizes(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| super::effective_sample_size(&self.trace(i)))
            .collect()
    }

    /// Posterior mean after burn-in.
    pub fn posterior_mean(&self) -> Vec<f64> {
        let post = self.post_burn_in();
        (0..self.dim())
            .map(|i| post.iter().map(|s| s[i]).sum::<f64>() / post.len() as f64)
            .collect()
    }

    /// Tab-separated export: iteration, parameters, log posterior.
    pub fn to_tsv(&self) -> String {
        let mut header = vec!["iteration"];
        header.extend(self.names.iter().map(String::as_str));
        header.push("log_posterior");
        tsv(
            &header,
            self.samples.iter().zip(&self.log_posterior).enumerate().map(|(i, (s, lp))| {
                let mut row = Vec::with_capacity(s.len() + 2);
                row.push(i as f64);
                row.extend_from_slice(s);
                row.push(*lp);
                row
            }),
        )
    }
}

/// Delayed-rejection acceptance over a path of points. Index lists select
/// sub-paths (prefixes and reversals) of the full proposal path.
struct DrPath<'a> {
    points: &'a [DVector<f64>],
    log_p: &'a [f64],
    factor: &'a DMatrix<f64>,
    dr_scale: f64,
}

impl DrPath<'_> {
    fn alpha(&self, idx: &[usize]) -> f64 {
        let n = idx.len() - 1;
        let first = self.log_p[idx[0]];
        let last = self.log_p[idx[n]];
        if last == f64::NEG_INFINITY {
            return 0.0;
        }
        if first == f64::NEG_INFINITY {
            return 1.0;
        }
        let mut forward = 1.0;
        let mut reverse = 1.0;
        let mut rev = Vec::with_capacity(n + 1);
        for k in 1..n {
            forward *= 1.0 - self.alpha(&idx[..=k]);
            rev.clear();
            rev.extend((0..=k).map(|i| idx[n - i]));
            reverse *= 1.0 - self.alpha(&rev);
            if reverse == 0.0 {
                return 0.0;
            }
        }
        let mut log_ratio = last - first;
        for k in 1..n {
            log_ratio += self.log_q_ratio(k, idx);
        }
        (log_ratio.exp() * reverse / forward).min(1.0)
    }

    /// Log ratio of the stage-`k` proposal densities along the reversed and
    /// forward paths.
    fn log_q_ratio(&self, k: usize, idx: &[usize]) -> f64 {
        let n = idx.len() - 1;
        if k == n {
            return 0.0;
        }
        let scale2 = self.dr_scale.powi(2 * (k as i32 - 1));
        let reversed = self.whitened_sq(&(&self.points[idx[n - k]] - &self.points[idx[n]]));
        let forward = self.whitened_sq(&(&self.points[idx[k]] - &self.points[idx[0]]));
        -0.5 * (reversed - forward) / scale2
    }

    fn whitened_sq(&self, v: &DVector<f64>) -> f64 {
        self.factor
            .solve_lower_triangular(v)
            .expect("proposal factor is nonsingular")
            .norm_squared()
    }
}

/// Running mean and scatter matrix.
struct Welford {
    n: usize,
    mean: DVector<f64>,
    scatter: DMatrix<f64>,
}

impl Welford {
    fn new(d: usize) -> Self {
        Self {
            n: 0,
            mean: DVector::zeros(d),
            scatter: DMatrix::zeros(d, d),
        }
    }

    fn push(&mut self, x: &DVector<f64>) {
        self.n += 1;
        let delta = x - &self.mean;
        self.mean += &delta / self.n as f64;
        let delta2 = x - &self.mean;
        self.scatter += &delta * delta2.transpose();
    }

    fn covariance(&self) -> Option<DMatrix<f64>> {
        (self.n > 1).then(|| {
            let c = &self.scatter / (self.n - 1) as f64;
            (&c + c.transpose()) * 0.5
        })
    }
}

/// Run DRAM on `log_target` from `init`.
///
/// `log_target` returns the unnormalized log posterior; `-inf` (or NaN)
/// marks a point outside the support. Errors it returns abort the run and
/// are reported with the iteration.
pub fn dram_run<F>(mut log_target: F, config: &DramConfig, init: &[f64]) -> Result<Chain>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let s = config.settings;
    s.validate()?;
    let d = init.len();
    if d == 0 {
        return Err(Error::usage("empty parameter vector"));
    }
    let cov = &config.proposal_cov;
    if cov.nrows() != d || cov.ncols() != d {
        return Err(Error::usage(format!(
            "proposal covariance is {}x{}, parameters have dimension {d}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if (cov - cov.transpose()).amax() > 1e-12 * cov.amax() {
        return Err(Error::usage("proposal covariance is not symmetric"));
    }
    let mut factor = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::usage("proposal covariance is not positive definite"))?
        .unpack();
    let mut current_cov = cov.clone();

    let mut x = DVector::from_column_slice(init);
    let mut lp_x = log_target(init).map_err(|e| sampler_err(0, e))?;
    if !lp_x.is_finite() {
        return Err(Error::usage(format!("log target is not finite at the initial point ({lp_x})")));
    }

    let mut rng = rng_from_seed(config.seed);
    let mut samples = Vec::with_capacity(s.chain_length);
    let mut log_posterior = Vec::with_capacity(s.chain_length);
    let mut accepted = vec![0; s.dr_stages];
    let mut attempted = vec![0; s.dr_stages];
    let mut history = Welford::new(d);
    let mut points: Vec<DVector<f64>> = Vec::with_capacity(s.dr_stages + 1);
    let mut log_p: Vec<f64> = Vec::with_capacity(s.dr_stages + 1);
    let idx: Vec<usize> = (0..=s.dr_stages).collect();

    samples.push(init.to_vec());
    log_posterior.push(lp_x);
    history.push(&x);

    for iter in 1..s.chain_length {
        points.clear();
        log_p.clear();
        points.push(x.clone());
        log_p.push(lp_x);
        for stage in 1..=s.dr_stages {
            let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let step = &factor * z * s.dr_scale.powi(stage as i32 - 1);
            let y = &x + step;
            let u: f64 = rng.random();
            let lp_y = log_target(y.as_slice()).map_err(|e| sampler_err(iter, e))?;
            let lp_y = if lp_y.is_nan() { f64::NEG_INFINITY } else { lp_y };
            points.push(y);
            log_p.push(lp_y);
            attempted[stage - 1] += 1;
            let path = DrPath {
                points: &points,
                log_p: &log_p,
                factor: &factor,
                dr_scale: s.dr_scale,
            };
            if u < path.alpha(&idx[..=stage]) {
                x = points.pop().expect("just pushed");
                lp_x = lp_y;
                accepted[stage - 1] += 1;
                break;
            }
        }
        samples.push(x.as_slice().to_vec());
        log_posterior.push(lp_x);
        history.push(&x);

        let done = iter + 1;
        if s.adapt && done >= s.adaptation_start && done % s.adaptation_interval == 0 {
            if let Some(c) = history.covariance() {
                let trace = c.trace();
                if trace > 0.0 && trace.is_finite() {
                    let eps = 1e-10 * trace / d as f64;
                    let adapted = (c + DMatrix::identity(d, d) * eps) * (2.4f64.powi(2) / d as f64);
                    if let Some(ch) = adapted.clone().cholesky() {
                        factor = ch.unpack();
                        current_cov = adapted;
                    }
                }
            }
        }
    }

    Ok(Chain {
        names: (0..d).map(|i| format!("theta{i}")).collect(),
        samples,
        log_posterior,
        burn_in: s.burn_in,
        accepted,
        attempted,
        proposal_cov: current_cov,
    })
}

fn sampler_err(iteration: usize, e: Error) -> Error {
    Error::Sampler {
        iteration,
        source: Box::new(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::{log_prior, Interval, PriorSpec};

    fn std_normal(x: &[f64]) -> Result<f64> {
        Ok(-0.5 * x.iter().map(|v| v * v).sum::<f64>())
    }

    #[test]
    fn two_d_standard_normal() {
        let cfg = DramConfig::new(ChainSettings::with_length(50_000, 25_000), DMatrix::identity(2, 2) * 0.25, 11);
        let chain = dram_run(std_normal, &cfg, &[3.0, -3.0]).unwrap();
        assert_eq!(chain.len(), 50_000);
        let post = chain.post_burn_in();
        let n = post.len() as f64;
        let mean = chain.posterior_mean();
        assert!(mean.iter().all(|m| m.abs() < 0.05), "{mean:?}");
        let mut cov = DMatrix::<f64>::zeros(2, 2);
        for s in post {
            let c = DVector::from_vec(vec![s[0] - mean[0], s[1] - mean[1]]);
            cov += &c * c.transpose();
        }
        cov /= n - 1.0;
        let err = (cov - DMatrix::identity(2, 2)).norm();
        assert!(err < 0.1, "frobenius {err}");
        for r in chain.acceptance_rates() {
            assert!(r > 0.0 && r < 1.0, "{r}");
        }
    }

    #[test]
    fn uniform_box_marginals_pass_ks() {
        let prior = PriorSpec::new(&["a", "b"], vec![Interval::new(0.0, 1.0).unwrap(), Interval::new(-2.0, 3.0).unwrap()])
            .unwrap();
        let cfg = DramConfig::new(ChainSettings::with_length(60_000, 10_000), DMatrix::identity(2, 2) * 0.1, 5);
        let chain = dram_run(|x| Ok(log_prior(x, &prior)), &cfg, &[0.5, 0.5]).unwrap();
        for s in chain.samples.iter() {
            assert_eq!(log_prior(s, &prior), 0.0);
        }
        let crit_const = 1.628;
        for (i, (lo, hi)) in [(0.0, 1.0), (-2.0, 3.0)].into_iter().enumerate() {
            // Thin so that retained draws are close to independent.
            let mut xs: Vec<f64> = chain.trace(i).into_iter().step_by(25).map(|v| (v - lo) / (hi - lo)).collect();
            xs.sort_by(f64::total_cmp);
            let n = xs.len() as f64;
            let d = xs
                .iter()
                .enumerate()
                .map(|(k, &x)| ((k + 1) as f64 / n - x).max(x - k as f64 / n))
                .fold(0.0, f64::max);
            assert!(d < crit_const / n.sqrt(), "parameter {i}: KS {d}");
        }
    }

    /// Independent random-walk Metropolis drawing from the generator in the
    /// same order: d normals, then one uniform.
    fn reference_metropolis(lp: impl Fn(&[f64]) -> f64, cov: &DMatrix<f64>, init: &[f64], n: usize, seed: u64) -> Vec<bool> {
        let l = cov.clone().cholesky().unwrap().unpack();
        let mut rng = rng_from_seed(seed);
        let mut x = DVector::from_column_slice(init);
        let mut lx = lp(init);
        let mut decisions = Vec::new();
        for _ in 1..n {
            let z = DVector::from_fn(init.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
            let y = &x + &l * z;
            let u: f64 = rng.random();
            let ly = lp(y.as_slice());
            let accept = u < (ly - lx).exp().min(1.0);
            if accept {
                x = y;
                lx = ly;
            }
            decisions.push(accept);
        }
        decisions
    }

    #[test]
    fn single_stage_without_adaptation_is_plain_metropolis() {
        let target = |x: &[f64]| -0.5 * (x[0] * x[0] / 2.0 + (x[1] - 1.0).powi(2) * 4.0) - x[2].abs();
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, 0.5, 0.1, 0.0, 0.1, 0.8]);
        let init = [0.3, 0.0, -1.0];
        let cfg = DramConfig::new(ChainSettings::metropolis(5000, 100), cov.clone(), 21);
        let chain = dram_run(|x| Ok(target(x)), &cfg, &init).unwrap();
        let moved: Vec<bool> = chain.samples.windows(2).map(|w| w[0] != w[1]).collect();
        let reference = reference_metropolis(target, &cov, &init, 5000, 21);
        assert_eq!(moved, reference);
    }

    #[test]
    fn double_well_histogram_matches_density() {
        let u = |x: f64| (x * x - 1.0).powi(2) / 0.5;
        let cfg = DramConfig::new(ChainSettings::metropolis(1_000_000, 10_000), DMatrix::from_element(1, 1, 1.0), 8);
        let chain = dram_run(|x| Ok(-u(x[0])), &cfg, &[1.0]).unwrap();
        let (lo, hi, bins) = (-2.5, 2.5, 50);
        let width = (hi - lo) / bins as f64;
        let mut hist = vec![0.0; bins];
        let post = chain.post_burn_in();
        for s in post {
            let b = ((s[0] - lo) / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                hist[b as usize] += 1.0;
            }
        }
        // Bin masses of the normalized density by Simpson's rule.
        let mass = |a: f64, b: f64| {
            let m = 200;
            let h = (b - a) / m as f64;
            (0..=m)
                .map(|i| {
                    let w = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                    w * (-u(a + i as f64 * h)).exp()
                })
                .sum::<f64>()
                * h
                / 3.0
        };
        let masses: Vec<f64> = (0..bins).map(|b| mass(lo + b as f64 * width, lo + (b + 1) as f64 * width)).collect();
        let z = mass(-6.0, 6.0);
        let n = post.len() as f64;
        let tv = 0.5
            * hist
                .iter()
                .zip(&masses)
                .map(|(h, m)| (h / n - m / z).abs())
                .sum::<f64>()
            + 0.5 * (1.0 - masses.iter().sum::<f64>() / z);
        assert!(tv < 0.05, "total variation {tv}");
    }

    #[test]
    fn identical_seeds_give_identical_chains() {
        let cfg = DramConfig::new(ChainSettings::with_length(3000, 1000), DMatrix::identity(2, 2), 4);
        let a = dram_run(std_normal, &cfg, &[1.0, 1.0]).unwrap();
        let b = dram_run(std_normal, &cfg, &[1.0, 1.0]).unwrap();
        assert_eq!(a, b);
        let other = DramConfig { seed: 5, ..cfg };
        assert_ne!(a.samples, dram_run(std_normal, &other, &[1.0, 1.0]).unwrap().samples);
    }

    #[test]
    fn later_stages_recover_from_oversized_proposals() {
        let cfg = DramConfig::new(
            ChainSettings {
                adapt: false,
                ..ChainSettings::with_length(20_000, 5000)
            },
            DMatrix::identity(1, 1) * 400.0,
            6,
        );
        let chain = dram_run(std_normal, &cfg, &[0.0]).unwrap();
        let rates = chain.acceptance_rates();
        assert!(rates[1] > rates[0] && rates[2] > 0.0, "{rates:?}");
        let m = chain.posterior_mean()[0];
        let v = chain.trace(0).iter().map(|x| (x - m).powi(2)).sum::<f64>() / (chain.len() - 5000) as f64;
        assert!(m.abs() < 0.1 && (v - 1.0).abs() < 0.15, "mean {m} var {v}");
    }

    #[test]
    fn invalid_configurations() {
        let cov = DMatrix::identity(1, 1);
        let bad = DramConfig::new(ChainSettings::with_length(10, 10), cov.clone(), 0);
        assert!(matches!(dram_run(std_normal, &bad, &[0.0]), Err(Error::Usage(_))));
        let good = DramConfig::new(ChainSettings::with_length(10, 5), cov.clone(), 0);
        assert!(dram_run(|_| Ok(f64::NEG_INFINITY), &good, &[0.0]).is_err());
        assert!(dram_run(std_normal, &good, &[0.0, 1.0]).is_err());
        let npd = DramConfig::new(ChainSettings::with_length(10, 5), -cov, 0);
        assert!(dram_run(std_normal, &npd, &[0.0]).is_err());
        let failing = dram_run(
            |x| if x[0].abs() > 0.5 { Err(Error::IllConditioned { jitter: 1.0 }) } else { Ok(0.0) },
            &good,
            &[0.0],
        );
        assert!(matches!(failing, Err(Error::Sampler { .. })));
    }

    #[test]
    fn tsv_export_has_header_and_rows() {
        let cfg = DramConfig::new(ChainSettings::with_length(10, 5), DMatrix::identity(2, 2), 0);
        let mut chain = dram_run(std_normal, &cfg, &[0.0, 0.0]).unwrap();
        chain.names = vec!["a".into(), "b".into()];
        let text = chain.to_tsv();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration\ta\tb\tlog_posterior");
        assert_eq!(lines.len(), 11);
        assert!(lines[1].starts_with("0\t0\t0\t"));
    }
}
