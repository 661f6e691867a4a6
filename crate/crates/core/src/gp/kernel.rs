use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `sigma2 * exp(-(xi - xj)^2 / (2 length^2))`.
#[inline]
pub fn sq_exp_kernel(xi: f64, xj: f64, signal_var: f64, length_scale: f64) -> f64 {
    let r = (xi - xj) / length_scale;
    signal_var * (-0.5 * r * r).exp()
}

/// Squared-exponential covariance with signal variance and length scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquaredExponential {
    pub signal_var: f64,
    pub length_scale: f64,
}

/// The covariance of a process and its derivative at two inputs:
/// `c00 = k(a, b)`, `c01 = dk/db`, `c10 = dk/da`, `c11 = d²k/da db`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeKernels {
    pub c00: f64,
    pub c01: f64,
    pub c10: f64,
    pub c11: f64,
}

impl SquaredExponential {
    /// Signal variance may be zero (degenerate prior); the length scale must be positive.
    pub fn new(signal_var: f64, length_scale: f64) -> Result<Self> {
        if !(signal_var >= 0.0 && signal_var.is_finite()) {
            return Err(Error::domain(format!("signal variance must be non-negative, got {signal_var}")));
        }
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::domain(format!("length scale must be positive, got {length_scale}")));
        }
        Ok(Self {
            signal_var,
            length_scale,
        })
    }

    #[inline]
    pub fn eval(&self, a: f64, b: f64) -> f64 {
        sq_exp_kernel(a, b, self.signal_var, self.length_scale)
    }

    /// `cov(f(a), f'(b)) = sigma2/l^2 (a - b) exp(..)`.
    #[inline]
    pub fn c01(&self, a: f64, b: f64) -> f64 {
        let l2 = self.length_scale * self.length_scale;
        (a - b) / l2 * self.eval(a, b)
    }

    /// `cov(f'(a), f(b)) = -sigma2/l^2 (a - b) exp(..)`.
    #[inline]
    pub fn c10(&self, a: f64, b: f64) -> f64 {
        -self.c01(a, b)
    }

    /// `cov(f'(a), f'(b)) = sigma2/l^4 (l^2 - (a - b)^2) exp(..)`.
    #[inline]
    pub fn c11(&self, a: f64, b: f64) -> f64 {
        let l2 = self.length_scale * self.length_scale;
        let d = a - b;
        (l2 - d * d) / (l2 * l2) * self.eval(a, b)
    }

    pub fn derivatives(&self, a: f64, b: f64) -> DerivativeKernels {
        DerivativeKernels {
            c00: self.eval(a, b),
            c01: self.c01(a, b),
            c10: self.c10(a, b),
            c11: self.c11(a, b),
        }
    }
}

/// All four derivative kernels at `(xi, xj)`.
pub fn derivative_kernels(xi: f64, xj: f64, kernel: &SquaredExponential) -> DerivativeKernels {
    kernel.derivatives(xi, xj)
}

/// Cross-covariance matrix `K[i, j] = k(xs[i], ys[j])`.
pub fn kernel_matrix(xs: &[f64], ys: &[f64], kernel: &SquaredExponential) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), ys.len(), |i, j| kernel.eval(xs[i], ys[j]))
}
