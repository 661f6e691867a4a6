//! Log-likelihood on a uniform input grid via the Levinson-Durbin recursion.
//!
//! With stationary covariance and equally spaced inputs, `K + noise² I` is a
//! symmetric Toeplitz matrix determined by its first column. The recursion
//! produces one-step prediction errors `e_k` with variances `v_k`, so that
//! `log det = Σ ln v_k` and `rᵀ (K + noise² I)⁻¹ r = Σ e_k² / v_k`.

use std::f64::consts::PI;

use super::{log_likelihood as dense_log_likelihood, MeanFunction, SquaredExponential};
use crate::error::Result;
use crate::lineshape::GRID_UNIFORMITY_TOL;

/// Smallest prediction-error variance accepted, relative to `t_0`, before
/// switching to the dense path.
const MIN_RELATIVE_VARIANCE: f64 = 1e-8;

/// `(log det, quadratic form)` for the symmetric Toeplitz matrix with first
/// column `col` and the vector `r`. Returns `None` if the matrix is not
/// numerically positive definite.
pub fn levinson(col: &[f64], r: &[f64]) -> Option<(f64, f64)> {
    let n = col.len();
    assert_eq!(n, r.len());
    if n == 0 {
        return Some((0.0, 0.0));
    }
    let t0 = col[0];
    if !(t0 > 0.0) {
        return None;
    }
    let floor = MIN_RELATIVE_VARIANCE * t0;
    let mut a = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut v = t0;
    let mut log_det = v.ln();
    let mut quad = r[0] * r[0] / v;
    for k in 1..n {
        let mut num = col[k];
        for i in 1..k {
            num -= a[i] * col[k - i];
        }
        let kappa = num / v;
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return None;
        }
        prev[1..k].copy_from_slice(&a[1..k]);
        for i in 1..k {
            a[i] = prev[i] - kappa * prev[k - i];
        }
        a[k] = kappa;
        v *= 1.0 - kappa * kappa;
        if !(v > floor) {
            return None;
        }
        let mut e = r[k];
        for i in 1..=k {
            e -= a[i] * r[k - i];
        }
        log_det += v.ln();
        quad += e * e / v;
    }
    Some((log_det, quad))
}

/// Log marginal likelihood on a uniform grid. Falls back to the dense
/// Cholesky path when the grid is not uniform or the recursion breaks down.
pub fn log_likelihood<M: MeanFunction>(
    grid: &[f64],
    targets: &[f64],
    kernel: &SquaredExponential,
    noise_std: f64,
    mean: &M,
) -> Result<f64> {
    let n = grid.len();
    if n < 2 || n != targets.len() || !is_uniform(grid) {
        return dense_log_likelihood(grid, targets, kernel, noise_std, mean);
    }
    let col: Vec<f64> = (0..n)
        .map(|k| kernel.eval(grid[0], grid[k]) + if k == 0 { noise_std * noise_std } else { 0.0 })
        .collect();
    let r: Vec<f64> = grid.iter().zip(targets).map(|(&x, &y)| y - mean.value(x)).collect();
    match levinson(&col, &r) {
        Some((log_det, quad)) => Ok(-0.5 * quad - 0.5 * log_det - 0.5 * n as f64 * (2.0 * PI).ln()),
        None => dense_log_likelihood(grid, targets, kernel, noise_std, mean),
    }
}

fn is_uniform(grid: &[f64]) -> bool {
    let step = grid[1] - grid[0];
    if step == 0.0 {
        return false;
    }
    let tol = GRID_UNIFORMITY_TOL * step.abs().max(1e-300) * grid.len() as f64;
    grid.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::ConstantMean;
    use crate::lineshape::uniform_grid;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn data(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let grid = uniform_grid(1550.0, 1750.0, n);
        let mut rng = rng_from_seed(seed);
        let y = grid
            .iter()
            .map(|x| 3.0 / (1.0 + ((x - 1650.0) / 10.0).powi(2)) + 0.1 * rng.random::<f64>())
            .collect();
        (grid, y)
    }

    #[test]
    fn matches_dense_on_spectrum_sized_problem() {
        let (grid, y) = data(256, 1);
        for (s2, l, noise) in [(1.0, 5.0, 0.1), (4.0, 20.0, 0.05), (0.5, 1.0, 0.3)] {
            let k = SquaredExponential::new(s2, l).unwrap();
            let fast = log_likelihood(&grid, &y, &k, noise, &ConstantMean(0.2)).unwrap();
            let dense = dense_log_likelihood(&grid, &y, &k, noise, &ConstantMean(0.2)).unwrap();
            assert_relative_eq!(fast, dense, max_relative = 1e-8);
        }
    }

    #[test]
    fn descending_grid_is_handled() {
        let (mut grid, mut y) = data(64, 2);
        grid.reverse();
        y.reverse();
        let k = SquaredExponential::new(1.0, 8.0).unwrap();
        let fast = log_likelihood(&grid, &y, &k, 0.1, &ConstantMean(0.0)).unwrap();
        let dense = dense_log_likelihood(&grid, &y, &k, 0.1, &ConstantMean(0.0)).unwrap();
        assert_relative_eq!(fast, dense, max_relative = 1e-8);
    }

    #[test]
    fn nonuniform_grid_falls_back() {
        let grid = vec![0.0, 0.5, 2.0, 2.1, 5.0];
        let y = vec![1.0, 0.2, -0.3, 0.0, 0.7];
        let k = SquaredExponential::new(1.0, 1.0).unwrap();
        let a = log_likelihood(&grid, &y, &k, 0.2, &ConstantMean(0.0)).unwrap();
        let b = dense_log_likelihood(&grid, &y, &k, 0.2, &ConstantMean(0.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn near_singular_falls_back() {
        // Very long length-scale and tiny noise: the recursion hits the floor.
        let (grid, y) = data(64, 3);
        let k = SquaredExponential::new(1.0, 1e4).unwrap();
        let a = log_likelihood(&grid, &y, &k, 1e-6, &ConstantMean(0.0));
        let b = dense_log_likelihood(&grid, &y, &k, 1e-6, &ConstantMean(0.0));
        assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            assert_eq!(a, b);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn agrees_with_dense(n in 2usize..60, s2 in 0.1f64..5.0, l in 0.5f64..30.0,
                             noise in 0.05f64..1.0, seed in 0u64..1000) {
            let (grid, y) = data(n, seed);
            let k = SquaredExponential::new(s2, l).unwrap();
            let fast = log_likelihood(&grid, &y, &k, noise, &ConstantMean(0.5)).unwrap();
            let dense = dense_log_likelihood(&grid, &y, &k, noise, &ConstantMean(0.5)).unwrap();
            prop_assert!((fast - dense).abs() <= 1e-7 * dense.abs().max(1.0));
        }
    }
}
