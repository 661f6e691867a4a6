//! Exact Gaussian-process regression in one input dimension.
//!
//! [`GpFit`] is the dense reference implementation. Two structured fast paths
//! compute the same quantities for the special input layouts used by the
//! estimator:
//!
//! * [`toeplitz`]: inputs on a uniform grid, where the covariance is Toeplitz
//!   and the log-likelihood costs O(n²).
//! * [`replicated`]: one input grid repeated J times, which collapses to a GP
//!   on the block means.

mod fit;
mod hyper;
mod kernel;
pub mod linalg;
pub mod replicated;
pub mod toeplitz;

pub use fit::{log_likelihood, sample_joint, GpFit, JointPrediction, Prediction};
pub use hyper::{Stage1Hyper, Stage2Hyper};
pub use kernel::{derivative_kernels, kernel_matrix, sq_exp_kernel, DerivativeKernels, SquaredExponential};
pub use replicated::ReplicatedGp;

/// Prior mean function of a GP, with its derivative.
pub trait MeanFunction: Clone + Send + Sync + std::fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;

    /// Scale the function by `c`.
    fn scaled(&self, c: f64) -> Self;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantMean(pub f64);

impl MeanFunction for ConstantMean {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }

    fn derivative(&self, _x: f64) -> f64 {
        0.0
    }

    fn scaled(&self, c: f64) -> Self {
        ConstantMean(self.0 * c)
    }
}

/// `beta0 * exp(beta1 * x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialMean {
    pub beta0: f64,
    pub beta1: f64,
}

impl MeanFunction for ExponentialMean {
    fn value(&self, x: f64) -> f64 {
        self.beta0 * (self.beta1 * x).exp()
    }

    fn derivative(&self, x: f64) -> f64 {
        self.beta0 * self.beta1 * (self.beta1 * x).exp()
    }

    fn scaled(&self, c: f64) -> Self {
        ExponentialMean {
            beta0: self.beta0 * c,
            beta1: self.beta1,
        }
    }
}
