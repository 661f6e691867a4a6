//! Line-shape functions and synthetic spectra.
//!
//! All widths are in cm⁻¹: `gamma` is the Lorentzian half-width at half
//! maximum, `sigma` the Gaussian standard deviation.

mod scenario;

pub use scenario::{
    reference_scenario, sample_scenario, sample_scenario_params, split_voigt_width, GridSpec,
    Scenario, ScenarioKind,
};

use std::f64::consts::{LN_2, PI};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Ratio between Gaussian FWHM and standard deviation, `2 sqrt(2 ln 2)`.
pub const GAUSS_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Relative tolerance on grid-spacing uniformity.
pub const GRID_UNIFORMITY_TOL: f64 = 1e-9;

/// Normalized Lorentzian `(1/(pi gamma)) gamma^2 / (nu^2 + gamma^2)`.
pub fn lorentzian(nu: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("lorentzian width must be positive, got {gamma}")));
    }
    Ok(lorentzian_unchecked(nu, gamma))
}

/// Normalized Gaussian with standard deviation `sigma`.
pub fn gaussian(nu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("gaussian width must be positive, got {sigma}")));
    }
    Ok(gaussian_unchecked(nu, sigma))
}

/// Pseudo-Voigt mixture `eta L(nu; gamma) + (1 - eta) G(nu; sigma)`.
///
/// `eta` comes from [`pseudo_voigt_eta`]. A zero `sigma` gives the
/// Lorentzian exactly, a zero `gamma` the Gaussian.
pub fn pseudo_voigt(nu: f64, gamma: f64, sigma: f64) -> Result<f64> {
    if !(gamma >= 0.0 && sigma >= 0.0) || gamma + sigma <= 0.0 {
        return Err(Error::domain(format!(
            "pseudo-Voigt needs non-negative widths, not both zero (gamma = {gamma}, sigma = {sigma})"
        )));
    }
    Ok(pseudo_voigt_unchecked(nu, gamma, sigma))
}

#[inline]
fn lorentzian_unchecked(nu: f64, gamma: f64) -> f64 {
    gamma / (PI * (nu * nu + gamma * gamma))
}

#[inline]
fn gaussian_unchecked(nu: f64, sigma: f64) -> f64 {
    (-0.5 * (nu / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt())
}

#[inline]
fn pseudo_voigt_unchecked(nu: f64, gamma: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return lorentzian_unchecked(nu, gamma);
    }
    if gamma == 0.0 {
        return gaussian_unchecked(nu, sigma);
    }
    let eta = pseudo_voigt_eta(gamma, sigma);
    eta * lorentzian_unchecked(nu, gamma) + (1.0 - eta) * gaussian_unchecked(nu, sigma)
}

/// Approximate Voigt FWHM from the Gaussian and Lorentzian FWHMs
/// (fifth-order polynomial rule).
pub fn voigt_fwhm(fwhm_gauss: f64, fwhm_lorentz: f64) -> f64 {
    let g = fwhm_gauss;
    let l = fwhm_lorentz;
    (g.powi(5)
        + 2.69269 * g.powi(4) * l
        + 2.42843 * g.powi(3) * l.powi(2)
        + 4.47163 * g.powi(2) * l.powi(3)
        + 0.07842 * g * l.powi(4)
        + l.powi(5))
    .powf(0.2)
}

/// Lorentzian mixing fraction for HWHM `gamma` and Gaussian std `sigma`.
pub fn pseudo_voigt_eta(gamma: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    if gamma == 0.0 {
        return 0.0;
    }
    let fl = 2.0 * gamma;
    let fg = sigma * GAUSS_FWHM_PER_SIGMA;
    let q = fl / voigt_fwhm(fg, fl);
    (1.36603 * q - 0.47719 * q * q + 0.11116 * q * q * q).clamp(0.0, 1.0)
}

/// Band parameters of a line-shape mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineShapeParams {
    areas: Vec<f64>,
    locations: Vec<f64>,
    lorentz_widths: Vec<f64>,
    gauss_widths: Vec<f64>,
}

impl LineShapeParams {
    pub fn new(
        areas: Vec<f64>,
        locations: Vec<f64>,
        lorentz_widths: Vec<f64>,
        gauss_widths: Vec<f64>,
    ) -> Result<Self> {
        let m = areas.len();
        if m == 0 {
            return Err(Error::domain("at least one band is required"));
        }
        if locations.len() != m || lorentz_widths.len() != m || gauss_widths.len() != m {
            return Err(Error::domain("band parameter vectors differ in length"));
        }
        for i in 0..m {
            let (a, l, g, s) = (areas[i], locations[i], lorentz_widths[i], gauss_widths[i]);
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::domain(format!("band {i}: area must be positive, got {a}")));
            }
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::domain(format!("band {i}: location must be positive, got {l}")));
            }
            if !(g >= 0.0 && s >= 0.0 && g.is_finite() && s.is_finite()) || g + s <= 0.0 {
                return Err(Error::domain(format!(
                    "band {i}: widths must be non-negative and not both zero (gamma = {g}, sigma = {s})"
                )));
            }
        }
        Ok(Self {
            areas,
            locations,
            lorentz_widths,
            gauss_widths,
        })
    }

    pub fn len(&self) -> usize {
        self.areas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.areas.is_empty()
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn lorentz_widths(&self) -> &[f64] {
        &self.lorentz_widths
    }

    pub fn gauss_widths(&self) -> &[f64] {
        &self.gauss_widths
    }

    /// `(area, location, gamma, sigma)` per band.
    pub fn bands(&self) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
        (0..self.len()).map(move |i| {
            (
                self.areas[i],
                self.locations[i],
                self.lorentz_widths[i],
                self.gauss_widths[i],
            )
        })
    }

    /// Noise-free line-shape mixture at wavenumber `nu`.
    pub fn evaluate(&self, nu: f64) -> f64 {
        self.bands()
            .map(|(a, l, g, s)| a * pseudo_voigt_unchecked(nu - l, g, s))
            .sum()
    }

    /// Contribution of band `m` alone at `nu`.
    pub fn evaluate_band(&self, m: usize, nu: f64) -> f64 {
        self.areas[m]
            * pseudo_voigt_unchecked(nu - self.locations[m], self.lorentz_widths[m], self.gauss_widths[m])
    }

    /// Multiply all widths by `factor`; line-shape mixing fractions are unchanged.
    pub fn scale_widths(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.areas.clone(),
            self.locations.clone(),
            self.lorentz_widths.iter().map(|g| g * factor).collect(),
            self.gauss_widths.iter().map(|s| s * factor).collect(),
        )
    }
}

/// Area-weighted mean Lorentzian HWHM `sum(a gamma) / sum(a)`.
pub fn true_mean_gamma(params: &LineShapeParams) -> f64 {
    let num: f64 = params.bands().map(|(a, _, g, _)| a * g).sum();
    let den: f64 = params.areas().iter().sum();
    num / den
}

/// A spectrum sampled on a uniform, increasing wavenumber grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    grid: Vec<f64>,
    intensities: Vec<f64>,
}

impl Spectrum {
    pub const MIN_LEN: usize = 8;

    pub fn new(grid: Vec<f64>, intensities: Vec<f64>) -> Result<Self> {
        if grid.len() != intensities.len() {
            return Err(Error::domain(format!(
                "grid has {} points but there are {} intensities",
                grid.len(),
                intensities.len()
            )));
        }
        if grid.len() < Self::MIN_LEN {
            return Err(Error::domain(format!(
                "spectrum needs at least {} points, got {}",
                Self::MIN_LEN,
                grid.len()
            )));
        }
        check_uniform(&grid)?;
        if let Some(i) = intensities.iter().position(|s| !s.is_finite()) {
            return Err(Error::domain(format!("intensity {i} is not finite")));
        }
        Ok(Self { grid, intensities })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn delta_nu(&self) -> f64 {
        (self.grid[self.len() - 1] - self.grid[0]) / (self.len() - 1) as f64
    }

    /// Width of the grid, `nu_N - nu_1`.
    pub fn span(&self) -> f64 {
        self.grid[self.len() - 1] - self.grid[0]
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensities.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Keep the points with `lo <= nu <= hi`. Bounds may be given in either order.
    pub fn crop(&self, a: f64, b: f64) -> Result<Spectrum> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let first = self.grid[0];
        let last = self.grid[self.len() - 1];
        let slack = 1e-9 * self.delta_nu();
        if lo < first - slack || hi > last + slack {
            return Err(Error::usage(format!(
                "region [{lo}, {hi}] is outside the data range [{first}, {last}]"
            )));
        }
        let (grid, intensities): (Vec<f64>, Vec<f64>) = self
            .grid
            .iter()
            .zip(&self.intensities)
            .filter(|(nu, _)| **nu >= lo - slack && **nu <= hi + slack)
            .map(|(nu, s)| (*nu, *s))
            .unzip();
        Spectrum::new(grid, intensities)
            .map_err(|e| Error::usage(format!("region [{lo}, {hi}] selects too little data: {e}")))
    }

    /// Multiply all intensities by `c`.
    pub fn scaled(&self, c: f64) -> Spectrum {
        Spectrum {
            grid: self.grid.clone(),
            intensities: self.intensities.iter().map(|s| s * c).collect(),
        }
    }
}

pub(crate) fn check_uniform(grid: &[f64]) -> Result<()> {
    let n = grid.len();
    if n < 2 {
        return Ok(());
    }
    let step = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain("grid must be strictly increasing"));
    }
    for (i, w) in grid.windows(2).enumerate() {
        let d = w[1] - w[0];
        if !((d - step).abs() <= GRID_UNIFORMITY_TOL * step) {
            return Err(Error::domain(format!(
                "grid spacing is not uniform at index {i}: {d} vs mean spacing {step}"
            )));
        }
    }
    Ok(())
}

/// Evenly spaced grid of `n` points on `[start, end]`.
pub fn uniform_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    let step = (end - start) / (n - 1) as f64;
    (0..n).map(|i| start + step * i as f64).collect()
}

/// Additive white-noise level and the seed of its generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_epsilon: f64,
    pub rng_seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_epsilon: f64, rng_seed: u64) -> Result<Self> {
        if !(sigma_epsilon >= 0.0) || !sigma_epsilon.is_finite() {
            return Err(Error::domain(format!(
                "noise level must be non-negative, got {sigma_epsilon}"
            )));
        }
        Ok(Self {
            sigma_epsilon,
            rng_seed,
        })
    }

    pub fn noiseless() -> Self {
        Self {
            sigma_epsilon: 0.0,
            rng_seed: 0,
        }
    }
}

/// Evaluate the band mixture on `grid` and add seeded white noise.
pub fn synth_spectrum(params: &LineShapeParams, grid: &[f64], noise: &NoiseSpec) -> Result<Spectrum> {
    let mut values: Vec<f64> = grid.iter().map(|&nu| params.evaluate(nu)).collect();
    if noise.sigma_epsilon > 0.0 {
        let mut rng = rng_from_seed(noise.rng_seed);
        let normal = Normal::new(0.0, noise.sigma_epsilon)
            .map_err(|e| Error::domain(format!("noise distribution: {e}")))?;
        for v in &mut values {
            *v += normal.sample(&mut rng);
        }
    }
    Spectrum::new(grid.to_vec(), values)
}

/// Half maximum of a Gaussian occurs at `sigma sqrt(2 ln 2)`.
pub fn gaussian_hwhm(sigma: f64) -> f64 {
    sigma * (2.0 * LN_2).sqrt()
}
