use serde::{Deserialize, Serialize};

use super::{ConstantMean, ExponentialMean, SquaredExponential};
use crate::error::{Error, Result};

/// Hyperparameters of the spectrum GP: constant mean `alpha`, signal std,
/// length scale (cm⁻¹) and noise std.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage1Hyper {
    pub alpha: f64,
    pub sigma_s: f64,
    pub phi: f64,
    pub sigma_eps: f64,
}

impl Stage1Hyper {
    pub const NAMES: [&'static str; 4] = ["alpha", "sigma_s", "phi", "sigma_eps"];

    pub fn new(alpha: f64, sigma_s: f64, phi: f64, sigma_eps: f64) -> Result<Self> {
        if !(alpha >= 0.0 && sigma_s > 0.0 && phi > 0.0 && sigma_eps > 0.0) {
            return Err(Error::domain(format!(
                "invalid spectrum GP parameters (alpha {alpha}, sigma_s {sigma_s}, phi {phi}, sigma_eps {sigma_eps})"
            )));
        }
        Ok(Self {
            alpha,
            sigma_s,
            phi,
            sigma_eps,
        })
    }

    /// Unchecked conversion from a parameter vector in [`Self::NAMES`] order.
    pub fn from_slice(theta: &[f64]) -> Self {
        Self {
            alpha: theta[0],
            sigma_s: theta[1],
            phi: theta[2],
            sigma_eps: theta[3],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.alpha, self.sigma_s, self.phi, self.sigma_eps]
    }

    pub fn kernel(&self) -> SquaredExponential {
        SquaredExponential {
            signal_var: self.sigma_s * self.sigma_s,
            length_scale: self.phi,
        }
    }

    pub fn mean(&self) -> ConstantMean {
        ConstantMean(self.alpha)
    }
}

/// Hyperparameters of the Fourier-magnitude GP: exponential mean
/// `beta0 exp(beta1 xi)`, signal std, length scale and noise std.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage2Hyper {
    pub beta0: f64,
    pub beta1: f64,
    pub sigma_c: f64,
    pub lambda: f64,
    pub sigma_z: f64,
}

impl Stage2Hyper {
    pub const NAMES: [&'static str; 5] = ["beta0", "beta1", "sigma_c", "lambda", "sigma_z"];

    pub fn new(beta0: f64, beta1: f64, sigma_c: f64, lambda: f64, sigma_z: f64) -> Result<Self> {
        if !(beta0 >= 0.0 && beta1.is_finite() && sigma_c > 0.0 && lambda > 0.0 && sigma_z > 0.0) {
            return Err(Error::domain(format!(
                "invalid Fourier GP parameters (beta0 {beta0}, beta1 {beta1}, sigma_c {sigma_c}, lambda {lambda}, sigma_z {sigma_z})"
            )));
        }
        Ok(Self {
            beta0,
            beta1,
            sigma_c,
            lambda,
            sigma_z,
        })
    }

    pub fn from_slice(theta: &[f64]) -> Self {
        Self {
            beta0: theta[0],
            beta1: theta[1],
            sigma_c: theta[2],
            lambda: theta[3],
            sigma_z: theta[4],
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.beta0, self.beta1, self.sigma_c, self.lambda, self.sigma_z]
    }

    pub fn kernel(&self) -> SquaredExponential {
        SquaredExponential {
            signal_var: self.sigma_c * self.sigma_c,
            length_scale: self.lambda,
        }
    }

    pub fn mean(&self) -> ExponentialMean {
        ExponentialMean {
            beta0: self.beta0,
            beta1: self.beta1,
        }
    }
}
