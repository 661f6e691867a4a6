//! Randomized test scenarios and their text format.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, LogNormal, Uniform};
use serde::{Deserialize, Serialize};

use super::{synth_spectrum, true_mean_gamma, uniform_grid, voigt_fwhm, LineShapeParams, NoiseSpec, Spectrum};
use super::GAUSS_FWHM_PER_SIGMA;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, sub_rng, Stream};

/// Noise standard deviation as a fraction of the noise-free spectrum maximum.
pub const NOISE_FRACTION: f64 = 0.05;

const AREA_RANGE: (f64, f64) = (1.0, 30.0);
const LOCATION_RANGE: (f64, f64) = (1625.0, 1675.0);
const LORENTZ_RANGE: (f64, f64) = (2.5, 20.0);
const GAUSS_RANGE: (f64, f64) = (10.0, 30.0);
/// Variance of log total width for Voigt bands; the median is set so the
/// mean total FWHM is 25 cm⁻¹.
const VOIGT_LOG_VAR: f64 = 0.16;
const VOIGT_MEAN_FWHM: f64 = 25.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Lorentzian,
    Gaussian,
    Voigt,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Lorentzian => "lorentzian",
            ScenarioKind::Gaussian => "gaussian",
            ScenarioKind::Voigt => "voigt",
        }
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lorentzian" | "lorentz" => Ok(ScenarioKind::Lorentzian),
            "gaussian" | "gauss" => Ok(ScenarioKind::Gaussian),
            "voigt" => Ok(ScenarioKind::Voigt),
            other => Err(Error::usage(format!(
                "unknown scenario kind '{other}' (expected lorentzian, gaussian or voigt)"
            ))),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Uniform wavenumber grid `points` samples over `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            start: 1550.0,
            end: 1750.0,
            points: 512,
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        uniform_grid(self.start, self.end, self.points)
    }
}

/// Gaussian FWHM that, combined with `lorentz_fwhm`, gives a Voigt FWHM of
/// `total_fwhm`. Solved by bisection to `1e-10 * total_fwhm`.
pub fn split_voigt_width(total_fwhm: f64, lorentz_fwhm: f64) -> Result<f64> {
    if !(total_fwhm > 0.0) || !(0.0..=total_fwhm).contains(&lorentz_fwhm) {
        return Err(Error::domain(format!(
            "cannot split total width {total_fwhm} with Lorentzian part {lorentz_fwhm}"
        )));
    }
    // voigt_fwhm is increasing in the Gaussian part and >= it, so the root is in [0, total].
    let (mut lo, mut hi) = (0.0, total_fwhm);
    let tol = 1e-10 * total_fwhm;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if voigt_fwhm(mid, lorentz_fwhm) < total_fwhm {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Draw `bands` line shapes of the given kind.
///
/// Per band, in generator order: area, location, then the width draws
/// (Lorentzian HWHM; Gaussian std; or Voigt total FWHM followed by the
/// Lorentzian FWHM share drawn uniformly below it).
pub fn sample_scenario_params(kind: ScenarioKind, bands: usize, seed: u64) -> Result<LineShapeParams> {
    if bands == 0 {
        return Err(Error::usage("scenario needs at least one band"));
    }
    let mut rng = sub_rng(seed, Stream::ScenarioParams, 0);
    let area = Uniform::new(AREA_RANGE.0, AREA_RANGE.1).expect("valid range");
    let location = Uniform::new(LOCATION_RANGE.0, LOCATION_RANGE.1).expect("valid range");
    let lorentz = Uniform::new(LORENTZ_RANGE.0, LORENTZ_RANGE.1).expect("valid range");
    let gauss = Uniform::new(GAUSS_RANGE.0, GAUSS_RANGE.1).expect("valid range");
    let total = LogNormal::new(VOIGT_MEAN_FWHM.ln() - VOIGT_LOG_VAR / 2.0, VOIGT_LOG_VAR.sqrt())
        .expect("valid lognormal");

    let mut a = Vec::with_capacity(bands);
    let mut l = Vec::with_capacity(bands);
    let mut g = Vec::with_capacity(bands);
    let mut s = Vec::with_capacity(bands);
    for _ in 0..bands {
        a.push(area.sample(&mut rng));
        l.push(location.sample(&mut rng));
        match kind {
            ScenarioKind::Lorentzian => {
                g.push(lorentz.sample(&mut rng));
                s.push(0.0);
            }
            ScenarioKind::Gaussian => {
                g.push(0.0);
                s.push(gauss.sample(&mut rng));
            }
            ScenarioKind::Voigt => {
                let delta = total.sample(&mut rng);
                let fl = rng.random_range(0.0..delta);
                let fg = split_voigt_width(delta, fl)?;
                g.push(fl / 2.0);
                s.push(fg / GAUSS_FWHM_PER_SIGMA);
            }
        }
    }
    LineShapeParams::new(a, l, g, s)
}

/// A synthetic test case: band parameters, noise and grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub seed: u64,
    pub params: LineShapeParams,
    pub noise: NoiseSpec,
    pub grid: GridSpec,
}

/// Draw a scenario on the default grid. The noise level is 5% of the
/// noise-free maximum.
pub fn sample_scenario(kind: ScenarioKind, bands: usize, seed: u64) -> Result<Scenario> {
    let params = sample_scenario_params(kind, bands, seed)?;
    Scenario::with_relative_noise(kind, seed, params, GridSpec::default())
}

const LORENTZIAN_REFERENCE: &str = include_str!("../../scenarios/lorentzian8.scn");
const GAUSSIAN_REFERENCE: &str = include_str!("../../scenarios/gaussian10.scn");
const VOIGT_REFERENCE: &str = include_str!("../../scenarios/voigt6.scn");

/// The shipped reference scenario for `kind` (8 Lorentzian, 10 Gaussian or
/// 6 Voigt bands).
pub fn reference_scenario(kind: ScenarioKind) -> Scenario {
    let (name, text) = match kind {
        ScenarioKind::Lorentzian => ("lorentzian8.scn", LORENTZIAN_REFERENCE),
        ScenarioKind::Gaussian => ("gaussian10.scn", GAUSSIAN_REFERENCE),
        ScenarioKind::Voigt => ("voigt6.scn", VOIGT_REFERENCE),
    };
    Scenario::parse(text, Path::new(name)).expect("shipped scenario files are valid")
}

impl Scenario {
    pub fn with_relative_noise(
        kind: ScenarioKind,
        seed: u64,
        params: LineShapeParams,
        grid: GridSpec,
    ) -> Result<Self> {
        let clean = synth_spectrum(&params, &grid.values(), &NoiseSpec::noiseless())?;
        let noise = NoiseSpec::new(
            NOISE_FRACTION * clean.max_intensity(),
            derive_seed(seed, Stream::ScenarioNoise, 0),
        )?;
        Ok(Self {
            kind,
            seed,
            params,
            noise,
            grid,
        })
    }

    pub fn true_mean_gamma(&self) -> f64 {
        true_mean_gamma(&self.params)
    }

    /// The noisy spectrum described by this scenario.
    pub fn spectrum(&self) -> Result<Spectrum> {
        synth_spectrum(&self.params, &self.grid.values(), &self.noise)
    }

    pub fn noise_free_spectrum(&self) -> Result<Spectrum> {
        synth_spectrum(&self.params, &self.grid.values(), &NoiseSpec::noiseless())
    }

    /// Same scenario with a different noise generator seed.
    pub fn with_noise_seed(&self, rng_seed: u64) -> Self {
        let mut s = self.clone();
        s.noise.rng_seed = rng_seed;
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# linewidth scenario");
        let _ = writeln!(out, "kind = {}", self.kind);
        let _ = writeln!(out, "M = {}", self.params.len());
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "sigma_epsilon = {}", self.noise.sigma_epsilon);
        let _ = writeln!(out, "noise_seed = {}", self.noise.rng_seed);
        let _ = writeln!(out, "grid = {} {} {}", self.grid.start, self.grid.end, self.grid.points);
        let _ = writeln!(out, "# true_mean_gamma = {:.4}", self.true_mean_gamma());
        let _ = writeln!(out, "# area location gamma sigma");
        for (a, l, g, s) in self.params.bands() {
            let _ = writeln!(out, "{a} {l} {g} {s}");
        }
        out
    }

    /// Parse the text format written by [`Scenario::to_text`]. `path` is
    /// used only in error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut kind = None;
        let mut bands = None;
        let mut seed = 0u64;
        let mut sigma_epsilon = None;
        let mut noise_seed = None;
        let mut grid = GridSpec::default();
        let mut rows: Vec<[f64; 4]> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                let value = value.trim();
                let bad = |what: &str| err(lineno, format!("invalid {what} '{value}'"));
                match key.trim() {
                    "kind" => kind = Some(value.parse::<ScenarioKind>().map_err(|e| err(lineno, e.to_string()))?),
                    "M" | "bands" => bands = Some(value.parse::<usize>().map_err(|_| bad("band count"))?),
                    "seed" => seed = value.parse().map_err(|_| bad("seed"))?,
                    "sigma_epsilon" => sigma_epsilon = Some(value.parse::<f64>().map_err(|_| bad("noise level"))?),
                    "noise_seed" => noise_seed = Some(value.parse::<u64>().map_err(|_| bad("noise seed"))?),
                    "grid" => {
                        let parts: Vec<&str> = value.split_whitespace().collect();
                        if parts.len() != 3 {
                            return Err(bad("grid (expected: start end points)"));
                        }
                        grid = GridSpec {
                            start: parts[0].parse().map_err(|_| bad("grid start"))?,
                            end: parts[1].parse().map_err(|_| bad("grid end"))?,
                            points: parts[2].parse().map_err(|_| bad("grid size"))?,
                        };
                        if !(grid.end > grid.start) || grid.points < Spectrum::MIN_LEN {
                            return Err(bad("grid"));
                        }
                    }
                    other => return Err(err(lineno, format!("unknown key '{other}'"))),
                }
                continue;
            }
            let fields: Vec<f64> = line
                .split_whitespace()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(lineno, format!("expected four numbers, got '{line}'")))?;
            let row: [f64; 4] = fields
                .try_into()
                .map_err(|_| err(lineno, format!("expected four numbers, got '{line}'")))?;
            rows.push(row);
        }

        let last = text.lines().count();
        let kind = kind.ok_or_else(|| err(last, "missing 'kind'".into()))?;
        let bands = bands.ok_or_else(|| err(last, "missing 'M'".into()))?;
        if rows.len() != bands {
            return Err(err(last, format!("header says M = {bands} but {} band rows follow", rows.len())));
        }
        let params = LineShapeParams::new(
            rows.iter().map(|r| r[0]).collect(),
            rows.iter().map(|r| r[1]).collect(),
            rows.iter().map(|r| r[2]).collect(),
            rows.iter().map(|r| r[3]).collect(),
        )
        .map_err(|e| err(last, e.to_string()))?;
        let mut scenario = match sigma_epsilon {
            Some(s) => Scenario {
                kind,
                seed,
                params,
                noise: NoiseSpec::new(s, 0).map_err(|e| err(last, e.to_string()))?,
                grid,
            },
            None => Scenario::with_relative_noise(kind, seed, params, grid)
                .map_err(|e| err(last, e.to_string()))?,
        };
        scenario.noise.rng_seed = noise_seed.unwrap_or_else(|| derive_seed(seed, Stream::ScenarioNoise, 0));
        Ok(scenario)
    }
}
