//! GP regression when the same input grid is observed `J` times.
//!
//! Stacking `J` replicates of a `P`-point grid gives covariance
//! `11ᵀ ⊗ K + s I`. Rotating onto the replicate mean and its orthogonal
//! complement splits the likelihood into a GP on the block mean with noise
//! variance `s / J` plus independent white noise on the within-replicate
//! deviations. The posterior over the latent function depends only on the
//! block mean.

use std::f64::consts::PI;

use super::{GpFit, JointPrediction, MeanFunction, Prediction, SquaredExponential};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ReplicatedGp<M: MeanFunction> {
    collapsed: GpFit<M>,
    replicates: usize,
    noise_var: f64,
    within_ss: f64,
}

impl<M: MeanFunction> ReplicatedGp<M> {
    /// `targets[j][p]` is replicate `j` at `inputs[p]`.
    pub fn new(inputs: Vec<f64>, targets: &[Vec<f64>], kernel: SquaredExponential, noise_std: f64, mean: M) -> Result<Self> {
        let p = inputs.len();
        let j = targets.len();
        if j == 0 {
            return Err(Error::domain("replicated GP needs at least one replicate"));
        }
        if let Some(bad) = targets.iter().find(|row| row.len() != p) {
            return Err(Error::domain(format!("replicate has {} values, grid has {p}", bad.len())));
        }
        if !(noise_std > 0.0 && noise_std.is_finite()) {
            return Err(Error::domain(format!("noise std must be positive, got {noise_std}")));
        }
        let block_mean: Vec<f64> = (0..p)
            .map(|i| targets.iter().map(|row| row[i]).sum::<f64>() / j as f64)
            .collect();
        let within_ss = targets
            .iter()
            .map(|row| row.iter().zip(&block_mean).map(|(y, m)| (y - m).powi(2)).sum::<f64>())
            .sum();
        let collapsed = GpFit::new(inputs, block_mean, kernel, noise_std / (j as f64).sqrt(), mean)?;
        Ok(Self {
            collapsed,
            replicates: j,
            noise_var: noise_std * noise_std,
            within_ss,
        })
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    /// The GP on the block means.
    pub fn collapsed(&self) -> &GpFit<M> {
        &self.collapsed
    }

    /// Log-likelihood of all `J * P` observations.
    pub fn log_likelihood(&self) -> f64 {
        let p = self.collapsed.inputs().len() as f64;
        let j = self.replicates as f64;
        let s = self.noise_var;
        let extra = (j - 1.0) * p;
        self.collapsed.log_likelihood() - 0.5 * self.within_ss / s - 0.5 * p * j.ln() - 0.5 * extra * s.ln()
            - 0.5 * extra * (2.0 * PI).ln()
    }

    pub fn predictive(&self, query: &[f64]) -> Prediction {
        self.collapsed.predictive(query)
    }

    pub fn joint_value_derivative(&self, query: &[f64]) -> JointPrediction {
        self.collapsed.joint_value_derivative(query)
    }
}
