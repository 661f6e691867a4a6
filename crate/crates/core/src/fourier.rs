//! FFT magnitudes of spectra and the mean-width estimator.
//!
//! Frequencies are in cycles per cm⁻¹ on the grid `xi_k = k / (N dnu)`, and
//! magnitudes are scaled by `dnu` so that they approximate the continuous
//! transform. Under this convention a Lorentzian of HWHM `gamma` has
//! magnitude `exp(-2 pi gamma xi)`, so the mean width is
//! `-Z'(0) / (2 pi Z(0))`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::tsv;
use crate::lineshape::check_uniform;
use crate::stats::quantile_sorted;

fn plan(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

fn magnitudes_with(fft: &dyn Fft<f64>, values: &[f64], delta_nu: f64) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf.iter().map(|c| c.norm() * delta_nu).collect()
}

/// Frequencies `k / (N dnu)` for `k = 0..count`.
pub fn frequency_grid(n: usize, delta_nu: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 / (n as f64 * delta_nu)).collect()
}

/// Frequency grid and `dnu`-scaled DFT magnitudes of `values`.
pub fn fft_magnitude(values: &[f64], delta_nu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = values.len();
    if n < 8 {
        return Err(Error::domain(format!("FFT input needs at least 8 points, got {n}")));
    }
    if !(delta_nu > 0.0) || !delta_nu.is_finite() {
        return Err(Error::domain(format!("grid spacing must be positive, got {delta_nu}")));
    }
    let mags = magnitudes_with(plan(n).as_ref(), values, delta_nu);
    Ok((frequency_grid(n, delta_nu, n), mags))
}

/// [`fft_magnitude`] for values on an explicit grid, which must be uniform.
pub fn fft_magnitude_on_grid(grid: &[f64], values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if grid.len() != values.len() {
        return Err(Error::domain("grid and values differ in length"));
    }
    if grid.len() < 2 {
        return Err(Error::domain("FFT input needs at least 8 points"));
    }
    check_uniform(grid)?;
    let delta_nu = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    fft_magnitude(values, delta_nu)
}

/// Truncated FFT magnitudes of `J` realizations, stacked per realization.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierDataset {
    /// `J * P` magnitudes; block `j` holds realization `j`.
    pub magnitudes: Vec<f64>,
    /// The frequency block `xi_0..xi_{P-1}` repeated `J` times.
    pub frequencies: Vec<f64>,
    pub j: usize,
    pub p: usize,
    pub delta_nu: f64,
    /// Length of the source realizations.
    pub n: usize,
}

impl FourierDataset {
    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    /// The `P` distinct frequencies.
    pub fn xi(&self) -> &[f64] {
        &self.frequencies[..self.p]
    }

    pub fn block(&self, j: usize) -> &[f64] {
        &self.magnitudes[j * self.p..(j + 1) * self.p]
    }

    pub fn blocks(&self) -> Vec<Vec<f64>> {
        (0..self.j).map(|j| self.block(j).to_vec()).collect()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }

    /// Largest retained frequency, `xi_{P-1}`.
    pub fn xi_max(&self) -> f64 {
        self.frequencies[self.p - 1]
    }

    /// Keep only the first `p` bins of every block.
    pub fn truncated(&self, p: usize) -> Result<Self> {
        if p > self.p || p < 4 {
            return Err(Error::usage(format!("cannot truncate {} bins to {p}", self.p)));
        }
        let mut magnitudes = Vec::with_capacity(self.j * p);
        for j in 0..self.j {
            magnitudes.extend_from_slice(&self.block(j)[..p]);
        }
        let xi = &self.xi()[..p];
        Ok(Self {
            magnitudes,
            frequencies: xi.iter().copied().cycle().take(self.j * p).collect(),
            j: self.j,
            p,
            delta_nu: self.delta_nu,
            n: self.n,
        })
    }

    /// Columns: realization, bin, xi, magnitude.
    pub fn to_tsv(&self) -> String {
        tsv(
            &["realization", "bin", "xi", "magnitude"],
            (0..self.len()).map(|i| [(i / self.p) as f64, (i % self.p) as f64, self.frequencies[i], self.magnitudes[i]]),
        )
    }
}

/// Keep the first `p` FFT magnitude bins of each realization.
pub fn build_dataset(realizations: &[Vec<f64>], delta_nu: f64, p: usize, exec: Execution) -> Result<FourierDataset> {
    let j = realizations.len();
    if j == 0 {
        return Err(Error::usage("no realizations"));
    }
    let n = realizations[0].len();
    if let Some(r) = realizations.iter().find(|r| r.len() != n) {
        return Err(Error::usage(format!("realizations differ in length ({} vs {n})", r.len())));
    }
    if p < 4 {
        return Err(Error::usage(format!("truncation length must be at least 4, got {p}")));
    }
    if p > n {
        return Err(Error::usage(format!("truncation length {p} exceeds realization length {n}")));
    }
    if n < 8 {
        return Err(Error::domain(format!("FFT input needs at least 8 points, got {n}")));
    }
    if !(delta_nu > 0.0) || !delta_nu.is_finite() {
        return Err(Error::domain(format!("grid spacing must be positive, got {delta_nu}")));
    }
    let fft = plan(n);
    let blocks = exec.map(realizations, |_, r| {
        let mut m = magnitudes_with(fft.as_ref(), r, delta_nu);
        m.truncate(p);
        m
    });
    let xi = frequency_grid(n, delta_nu, p);
    Ok(FourierDataset {
        magnitudes: blocks.concat(),
        frequencies: xi.iter().copied().cycle().take(j * p).collect(),
        j,
        p,
        delta_nu,
        n,
    })
}

/// `-Z'(0) / (2 pi Z(0))`, or `None` when `Z(0) <= 0`.
pub fn gamma_estimate_from_point(value: f64, derivative: f64) -> Option<f64> {
    if value > 0.0 && derivative.is_finite() {
        Some(-derivative / (2.0 * PI * value))
    } else {
        None
    }
}

/// Fraction trimmed from each tail before averaging the curve.
pub const CURVE_TRIM: f64 = 0.025;

/// Pointwise summary of `gamma(xi) = -Z'(xi) / (2 pi Z(xi))` over joint draws.
///
/// The ratio has heavy tails where `Z` approaches zero, so `mean` is the
/// mean of the draws inside the central 95% interval; this keeps
/// `lower <= mean <= upper` at every point.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaCurve {
    pub xi: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Draws excluded at each point because `Z(xi) <= 0`.
    pub excluded: Vec<usize>,
}

impl GammaCurve {
    /// Columns: xi, mean, lower, upper.
    pub fn to_tsv(&self) -> String {
        tsv(
            &["xi", "mean", "lower", "upper"],
            (0..self.xi.len()).map(|i| [self.xi[i], self.mean[i], self.lower[i], self.upper[i]]),
        )
    }
}

/// Summarize joint draws `(Z(xi), Z'(xi))` over a grid starting at 0.
pub fn gamma_curve(xi: &[f64], draws: &[(DVector<f64>, DVector<f64>)]) -> Result<GammaCurve> {
    if xi.first() != Some(&0.0) {
        return Err(Error::usage("gamma curve grid must start at 0"));
    }
    if let Some((v, d)) = draws.iter().find(|(v, d)| v.len() != xi.len() || d.len() != xi.len()) {
        return Err(Error::usage(format!(
            "draw has {} values and {} derivatives for {} grid points",
            v.len(),
            d.len(),
            xi.len()
        )));
    }
    let mut curve = GammaCurve {
        xi: xi.to_vec(),
        mean: Vec::with_capacity(xi.len()),
        lower: Vec::with_capacity(xi.len()),
        upper: Vec::with_capacity(xi.len()),
        excluded: Vec::with_capacity(xi.len()),
    };
    for k in 0..xi.len() {
        let mut g: Vec<f64> = draws
            .iter()
            .filter_map(|(v, d)| gamma_estimate_from_point(v[k], d[k]))
            .collect();
        curve.excluded.push(draws.len() - g.len());
        if g.is_empty() {
            curve.mean.push(f64::NAN);
            curve.lower.push(f64::NAN);
            curve.upper.push(f64::NAN);
            continue;
        }
        g.sort_by(f64::total_cmp);
        let lo = quantile_sorted(&g, CURVE_TRIM);
        let hi = quantile_sorted(&g, 1.0 - CURVE_TRIM);
        let inside: Vec<f64> = g.iter().copied().filter(|x| *x >= lo && *x <= hi).collect();
        let mean = inside.iter().sum::<f64>() / inside.len() as f64;
        curve.mean.push(mean.clamp(lo, hi));
        curve.lower.push(lo);
        curve.upper.push(hi);
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lineshape::{lorentzian, uniform_grid, LineShapeParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn slope(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn constant_input_has_only_dc() {
        let (xi, m) = fft_magnitude(&[2.5; 64], 0.5).unwrap();
        assert_relative_eq!(m[0], 2.5 * 64.0 * 0.5, max_relative = 1e-14);
        assert!(m[1..].iter().all(|v| v.abs() <= 1e-10 * m[0]));
        assert_eq!(xi[1], 1.0 / 32.0);
    }

    #[test]
    fn parseval() {
        let dnu = 0.39;
        let v: Vec<f64> = (0..300).map(|i| ((i as f64) * 0.37).sin() + 0.1 * (i % 7) as f64).collect();
        let (_, m) = fft_magnitude(&v, dnu).unwrap();
        let lhs: f64 = v.iter().map(|s| s * s).sum::<f64>() * dnu;
        let rhs: f64 = m.iter().map(|s| s * s).sum::<f64>() / (300.0 * dnu);
        assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
    }

    #[test]
    fn lorentzian_log_magnitude_slope() {
        let gamma = 10.0;
        let grid = uniform_grid(-2000.0, 2000.0, 8192);
        let v: Vec<f64> = grid.iter().map(|&x| lorentzian(x, gamma).unwrap()).collect();
        let (xi, m) = fft_magnitude_on_grid(&grid, &v).unwrap();
        let logs: Vec<f64> = m[1..=20].iter().map(|v| v.ln()).collect();
        let s = slope(&xi[1..=20], &logs);
        let expected = -2.0 * PI * gamma;
        assert!((s / expected - 1.0).abs() < 0.02, "slope {s} vs {expected}");
    }

    #[test]
    fn circular_shift_invariance() {
        let v: Vec<f64> = (0..128).map(|i| (-(i as f64 - 40.0).powi(2) / 50.0).exp() + 0.01 * i as f64).collect();
        let (_, a) = fft_magnitude(&v, 1.0).unwrap();
        for shift in [1, 17, 64, 127] {
            let mut w = v.clone();
            w.rotate_right(shift);
            let (_, b) = fft_magnitude(&w, 1.0).unwrap();
            let max = a.iter().cloned().fold(0.0, f64::max);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-9 * max);
            }
        }
    }

    #[test]
    fn nonuniform_grid_and_short_input_are_rejected() {
        let mut grid = uniform_grid(0.0, 10.0, 16);
        grid[5] += 0.1;
        assert!(matches!(fft_magnitude_on_grid(&grid, &[0.0; 16]), Err(Error::Domain(_))));
        assert!(fft_magnitude(&[1.0; 7], 1.0).is_err());
    }

    #[test]
    fn dataset_layout() {
        let r: Vec<f64> = (0..64).map(|i| (i as f64 * 0.3).cos() + 2.0).collect();
        let single = build_dataset(std::slice::from_ref(&r), 0.5, 10, Execution::Sequential).unwrap();
        let (xi, m) = fft_magnitude(&r, 0.5).unwrap();
        assert_eq!(single.magnitudes, m[..10].to_vec());
        assert_eq!(single.frequencies, xi[..10].to_vec());

        let triple = build_dataset(&vec![r.clone(); 3], 0.5, 10, Execution::Parallel).unwrap();
        for j in 0..3 {
            assert_eq!(triple.block(j), single.magnitudes.as_slice());
            assert_eq!(&triple.frequencies[j * 10..(j + 1) * 10], single.xi());
        }

        let other: Vec<f64> = r.iter().map(|v| v * 2.0).collect();
        let ordered = build_dataset(&[r.clone(), other], 0.5, 10, Execution::Parallel).unwrap();
        assert_relative_eq!(ordered.block(1)[0], 2.0 * ordered.block(0)[0]);

        let many: Vec<Vec<f64>> = (0..50).map(|_| r.clone()).collect();
        let d = build_dataset(&many, 0.5, 30, Execution::Parallel).unwrap();
        assert_eq!(d.len(), 1500);
        assert_eq!(d.xi()[0], 0.0);
        assert!(d.magnitudes.iter().all(|v| *v >= 0.0));
        assert!(matches!(build_dataset(&[r], 0.5, 65, Execution::Sequential), Err(Error::Usage(_))));
    }

    #[test]
    fn point_estimator() {
        let (a, gamma) = (3.0, 10.0);
        let g = gamma_estimate_from_point(a, -2.0 * PI * gamma * a).unwrap();
        assert_relative_eq!(g, gamma, max_relative = 1e-15);
        assert_eq!(gamma_estimate_from_point(1.0, 0.0), Some(0.0));
        assert_eq!(gamma_estimate_from_point(0.0, -1.0), None);
        assert_eq!(gamma_estimate_from_point(-1.0, -1.0), None);
    }

    proptest! {
        #[test]
        fn point_estimator_is_scale_free(z in 1e-6f64..1e6, dz in -1e6f64..1e6, c in 1e-3f64..1e3) {
            let a = gamma_estimate_from_point(z, dz).unwrap();
            let b = gamma_estimate_from_point(c * z, c * dz).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn curve_of_single_lorentzian_is_flat() {
        let xi: Vec<f64> = (0..20).map(|k| k as f64 * 0.002).collect();
        let gamma = 7.0;
        let draws: Vec<(DVector<f64>, DVector<f64>)> = (1..=50)
            .map(|a| {
                let a = a as f64;
                let v = DVector::from_iterator(20, xi.iter().map(|x| a * (-2.0 * PI * gamma * x).exp()));
                let d = &v * (-2.0 * PI * gamma);
                (v, d)
            })
            .collect();
        let c = gamma_curve(&xi, &draws).unwrap();
        for k in 0..20 {
            assert_relative_eq!(c.mean[k], gamma, max_relative = 1e-12);
            assert!(c.lower[k] <= c.mean[k] && c.mean[k] <= c.upper[k]);
        }
        assert!(c.excluded.iter().all(|&e| e == 0));
        assert!(gamma_curve(&xi[1..], &draws).is_err());
    }

    #[test]
    fn curve_interval_ordering_with_heavy_tails() {
        let xi = vec![0.0, 0.01];
        let draws: Vec<(DVector<f64>, DVector<f64>)> = (0..400)
            .map(|i| {
                let v = 0.01 + ((i * 37) % 101) as f64 / 50.0 - 0.2;
                let d = -((i * 13) % 17) as f64;
                (DVector::from_vec(vec![v, v]), DVector::from_vec(vec![d, d + 1.0]))
            })
            .collect();
        let c = gamma_curve(&xi, &draws).unwrap();
        for k in 0..2 {
            assert!(c.lower[k] <= c.mean[k] && c.mean[k] <= c.upper[k]);
            assert!(c.excluded[k] > 0);
        }
        let z: Vec<f64> = draws.iter().filter_map(|(v, d)| gamma_estimate_from_point(v[0], d[0])).collect();
        let mut z = z;
        z.sort_by(f64::total_cmp);
        assert_eq!(c.lower[0], quantile_sorted(&z, 0.025));
    }

    #[test]
    fn wide_grid_slope_approaches_mean_width() {
        let p = LineShapeParams::new(
            vec![5.0, 12.0, 3.0],
            vec![1630.0, 1650.0, 1671.0],
            vec![4.0, 11.0, 18.0],
            vec![0.0; 3],
        )
        .unwrap();
        let truth = crate::lineshape::true_mean_gamma(&p);
        let mut errors = Vec::new();
        for half in [500.0, 4000.0, 32000.0] {
            let grid = uniform_grid(1650.0 - half, 1650.0 + half, (4.0 * half) as usize + 1);
            let v: Vec<f64> = grid.iter().map(|&x| p.evaluate(x)).collect();
            let (xi, m) = fft_magnitude_on_grid(&grid, &v).unwrap();
            // Central difference at a fixed bin: the physical frequency
            // shrinks as the window grows, but stays clear of the region
            // below 1/width where truncation flattens the transform.
            let k = 4;
            let dlog = (m[k + 1].ln() - m[k - 1].ln()) / (xi[k + 1] - xi[k - 1]);
            errors.push((-dlog / (2.0 * PI) / truth - 1.0).abs());
        }
        assert!(errors[2] < 0.03, "{errors:?}");
        assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    }
}
