use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open interval `(lower, upper)`; either bound may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) {
            return Err(Error::domain(format!("empty prior interval ({lower}, {upper})")));
        }
        Ok(Self { lower, upper })
    }

    pub fn positive() -> Self {
        Self {
            lower: 0.0,
            upper: f64::INFINITY,
        }
    }

    pub fn real_line() -> Self {
        Self {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

/// Independent uniform priors on a box, one interval per parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub names: Vec<String>,
    pub intervals: Vec<Interval>,
}

impl PriorSpec {
    pub fn new(names: &[&str], intervals: Vec<Interval>) -> Result<Self> {
        if names.len() != intervals.len() {
            return Err(Error::usage(format!(
                "{} parameter names for {} intervals",
                names.len(),
                intervals.len()
            )));
        }
        Ok(Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            intervals,
        })
    }

    /// Spectrum GP: `alpha, sigma_s, sigma_eps > 0`, `phi` in `(0, 2 span)`.
    pub fn stage1(span: f64) -> Result<Self> {
        Self::new(
            &crate::gp::Stage1Hyper::NAMES,
            vec![
                Interval::positive(),
                Interval::positive(),
                Interval::new(0.0, 2.0 * span)?,
                Interval::positive(),
            ],
        )
    }

    /// Fourier GP: `beta0` in `(0, 10 max_z)`, `beta1` unrestricted,
    /// `sigma_c, sigma_z > 0`, `lambda` in `(0, 3 xi_max)`.
    pub fn stage2(max_z: f64, xi_max: f64) -> Result<Self> {
        Self::new(
            &crate::gp::Stage2Hyper::NAMES,
            vec![
                Interval::new(0.0, 10.0 * max_z)?,
                Interval::real_line(),
                Interval::positive(),
                Interval::new(0.0, 3.0 * xi_max)?,
                Interval::positive(),
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim() && self.intervals.iter().zip(theta).all(|(iv, &x)| iv.contains(x))
    }
}

/// Unnormalized log density of the box prior: 0 inside, `-inf` outside.
///
/// # Panics
/// If `theta` and `priors` differ in dimension.
pub fn log_prior(theta: &[f64], priors: &PriorSpec) -> f64 {
    assert_eq!(theta.len(), priors.dim(), "parameter dimension mismatch");
    if priors.contains(theta) {
        0.0
    } else {
        f64::NEG_INFINITY
    }
}
