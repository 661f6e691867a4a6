//! Estimation of the area-weighted mean Lorentzian line width of a spectrum.
//!
//! The estimator works in two stages. A Gaussian process with a constant mean
//! and squared-exponential kernel is fitted to the measured spectrum by
//! adaptive MCMC, and noisy realizations are drawn from its posterior
//! predictive. The low-frequency FFT magnitudes of those realizations are then
//! modelled by a second Gaussian process with an exponential mean, whose joint
//! value/derivative predictive at zero frequency yields samples of
//!
//! ```text
//! mean_gamma = -Z'(0) / (2 pi Z(0))
//! ```
//!
//! Modules:
//!
//! * [`lineshape`]: line-shape functions, synthetic spectra and scenarios.
//! * [`gp`]: exact GP regression, derivative kernels, structured fast paths.
//! * [`mcmc`]: delayed-rejection adaptive Metropolis and box priors.
//! * [`fourier`]: truncated FFT-magnitude datasets and the width estimator.
//! * [`pipeline`]: the end-to-end estimator, sensitivity scans, coverage runs.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod fourier;
pub mod gp;
pub mod io;
pub mod lineshape;
pub mod mcmc;
pub mod pipeline;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fourier::{FourierDataset, GammaCurve};
pub use lineshape::{LineShapeParams, NoiseSpec, Scenario, ScenarioKind, Spectrum};
pub use pipeline::{GammaPosterior, PipelineConfig, PipelineOutput};
