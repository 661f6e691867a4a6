use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::CholeskyFactor;
use super::{kernel_matrix, MeanFunction, SquaredExponential};
use crate::error::{Error, Result};

/// A GP conditioned on training data, caching the Cholesky factor of
/// `K + noise² I` and the weights `(K + noise² I)⁻¹ (y - m(x))`.
#[derive(Clone, Debug)]
pub struct GpFit<M: MeanFunction> {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    kernel: SquaredExponential,
    noise_var: f64,
    mean: M,
    factor: CholeskyFactor,
    weights: DVector<f64>,
    /// `L⁻¹ r`, kept for the quadratic form.
    whitened: DVector<f64>,
}

/// Predictive mean and covariance at a set of query points.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// Joint predictive of the process and its derivative at `n` query points.
/// The covariance is `2n × 2n`, value block first.
#[derive(Clone, Debug)]
pub struct JointPrediction {
    pub mean_value: DVector<f64>,
    pub mean_derivative: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl<M: MeanFunction> GpFit<M> {
    pub fn new(inputs: Vec<f64>, targets: Vec<f64>, kernel: SquaredExponential, noise_std: f64, mean: M) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::domain(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::domain(format!("noise std must be non-negative, got {noise_std}")));
        }
        let noise_var = noise_std * noise_std;
        let mut k = kernel_matrix(&inputs, &inputs, &kernel);
        for i in 0..inputs.len() {
            k[(i, i)] += noise_var;
        }
        let factor = CholeskyFactor::new(k)?;
        let residual = DVector::from_iterator(
            inputs.len(),
            inputs.iter().zip(&targets).map(|(&x, &y)| y - mean.value(x)),
        );
        let whitened = factor.solve_lower(&residual);
        let weights = factor.solve(&residual);
        Ok(Self {
            inputs,
            targets,
            kernel,
            noise_var,
            mean,
            factor,
            weights,
            whitened,
        })
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn kernel(&self) -> &SquaredExponential {
        &self.kernel
    }

    pub fn mean_function(&self) -> &M {
        &self.mean
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// Log marginal likelihood of the targets.
    pub fn log_likelihood(&self) -> f64 {
        let n = self.inputs.len() as f64;
        if self.inputs.is_empty() {
            return 0.0;
        }
        -0.5 * self.whitened.norm_squared() - 0.5 * self.factor.log_det() - 0.5 * n * (2.0 * PI).ln()
    }

    /// Predictive mean and covariance of the latent function at `query`.
    pub fn predictive(&self, query: &[f64]) -> Prediction {
        let cross = kernel_matrix(&self.inputs, query, &self.kernel);
        let mean = DVector::from_iterator(
            query.len(),
            query
                .iter()
                .enumerate()
                .map(|(j, &q)| self.mean.value(q) + cross.column(j).dot(&self.weights)),
        );
        let v = self.factor.solve_lower_mat(&cross);
        let cov = kernel_matrix(query, query, &self.kernel) - v.transpose() * v;
        Prediction { mean, cov }
    }

    /// Draw `mu* + L w + noise_std e` at `query`, where `L` is the lower
    /// Cholesky factor of the predictive covariance. `w` is drawn before `e`.
    pub fn sample_realization<R: Rng + ?Sized>(&self, query: &[f64], noise_std: f64, rng: &mut R) -> Result<DVector<f64>> {
        self.predictive(query).sample(noise_std, rng)
    }

    /// Joint predictive of the function and its derivative at `query`.
    pub fn joint_value_derivative(&self, query: &[f64]) -> JointPrediction {
        let n = self.inputs.len();
        let m = query.len();
        let k = &self.kernel;
        // cross[i, j]: cov(f(x_i), f(q_j)); cross[i, m + j]: cov(f(x_i), f'(q_j)).
        let cross = DMatrix::from_fn(n, 2 * m, |i, j| {
            if j < m {
                k.eval(self.inputs[i], query[j])
            } else {
                k.c01(self.inputs[i], query[j - m])
            }
        });
        let prior = DMatrix::from_fn(2 * m, 2 * m, |a, b| {
            let (qa, da) = (query[a % m], a >= m);
            let (qb, db) = (query[b % m], b >= m);
            match (da, db) {
                (false, false) => k.eval(qa, qb),
                (false, true) => k.c01(qa, qb),
                (true, false) => k.c10(qa, qb),
                (true, true) => k.c11(qa, qb),
            }
        });
        let shift = cross.transpose() * &self.weights;
        let mean_value = DVector::from_fn(m, |j, _| self.mean.value(query[j]) + shift[j]);
        let mean_derivative = DVector::from_fn(m, |j, _| self.mean.derivative(query[j]) + shift[m + j]);
        let v = self.factor.solve_lower_mat(&cross);
        let mut cov = prior - v.transpose() * v;
        symmetrize(&mut cov);
        JointPrediction {
            mean_value,
            mean_derivative,
            cov,
        }
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn standard_normals<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

impl Prediction {
    /// Draw `mean + L w + noise_std e`.
    pub fn sample<R: Rng + ?Sized>(&self, noise_std: f64, rng: &mut R) -> Result<DVector<f64>> {
        let mut cov = self.cov.clone();
        symmetrize(&mut cov);
        let factor = CholeskyFactor::new(cov)?;
        let n = self.mean.len();
        let w = standard_normals(n, rng);
        let e = standard_normals(n, rng);
        Ok(&self.mean + factor.l() * w + e * noise_std)
    }
}

/// Draw `[value; derivative] = [mean; mean'] + Q r` with `Q` the lower
/// Cholesky factor of the joint covariance.
pub fn sample_joint<R: Rng + ?Sized>(pred: &JointPrediction, rng: &mut R) -> Result<(DVector<f64>, DVector<f64>)> {
    let factor = CholeskyFactor::new(pred.cov.clone())?;
    let m = pred.mean_value.len();
    let r = standard_normals(2 * m, rng);
    let draw = factor.l() * r;
    let value = &pred.mean_value + draw.rows(0, m);
    let derivative = &pred.mean_derivative + draw.rows(m, m);
    Ok((value, derivative))
}

/// Log marginal likelihood of `targets` under the GP, via Cholesky.
pub fn log_likelihood<M: MeanFunction>(
    inputs: &[f64],
    targets: &[f64],
    kernel: &SquaredExponential,
    noise_std: f64,
    mean: &M,
) -> Result<f64> {
    Ok(GpFit::new(inputs.to_vec(), targets.to_vec(), *kernel, noise_std, mean.clone())?.log_likelihood())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{ConstantMean, ExponentialMean};
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

    /// Dense oracle: explicit inverse and determinant.
    fn dense_log_likelihood(x: &[f64], y: &[f64], k: &SquaredExponential, noise: f64, mean: f64) -> f64 {
        let n = x.len();
        let mut a = kernel_matrix(x, x, k);
        for i in 0..n {
            a[(i, i)] += noise * noise;
        }
        let r = DVector::from_iterator(n, y.iter().map(|v| v - mean));
        let inv = a.clone().try_inverse().unwrap();
        let quad = (r.transpose() * inv * &r)[(0, 0)];
        -0.5 * quad - 0.5 * a.determinant().ln() - 0.5 * n as f64 * (2.0 * PI).ln()
    }

    fn random_problem(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = rng_from_seed(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.7).sin() + 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
        (x, y)
    }

    #[test]
    fn standard_normal_log_densities() {
        let k = SquaredExponential::new(0.5, 1.0).unwrap();
        let ll = log_likelihood(&[0.0], &[0.0], &k, 0.5f64.sqrt(), &ConstantMean(0.0)).unwrap();
        assert_relative_eq!(ll, -0.5 * (2.0 * PI).ln(), max_relative = 1e-14);
        // Two far-apart inputs are independent.
        let k = SquaredExponential::new(0.5, 1e-3).unwrap();
        let ll = log_likelihood(&[0.0, 100.0], &[0.0, 0.0], &k, 0.5f64.sqrt(), &ConstantMean(0.0)).unwrap();
        assert_relative_eq!(ll, -(2.0 * PI).ln(), max_relative = 1e-14);
    }

    #[test]
    fn log_likelihood_matches_dense_oracle() {
        let (x, y) = random_problem(20, 4);
        let k = SquaredExponential::new(1.3, 1.7).unwrap();
        let ll = log_likelihood(&x, &y, &k, 0.3, &ConstantMean(0.2)).unwrap();
        let oracle = dense_log_likelihood(&x, &y, &k, 0.3, 0.2);
        assert_relative_eq!(ll, oracle, max_relative = 1e-8);
    }

    #[test]
    fn log_det_matches_dense_oracle() {
        for n in [5, 20, 50] {
            let (x, _) = random_problem(n, n as u64);
            let k = SquaredExponential::new(2.0, 0.8).unwrap();
            let mut a = kernel_matrix(&x, &x, &k);
            for i in 0..n {
                a[(i, i)] += 0.25;
            }
            let f = CholeskyFactor::new(a.clone()).unwrap();
            assert_relative_eq!(f.log_det(), a.determinant().ln(), max_relative = 1e-8);
        }
    }

    #[test]
    fn predictive_matches_dense_oracle() {
        let (x, y) = random_problem(10, 8);
        let k = SquaredExponential::new(1.1, 1.4).unwrap();
        let fit = GpFit::new(x.clone(), y.clone(), k, 0.2, ConstantMean(0.5)).unwrap();
        let q = [0.3, 2.2, 5.0, 9.9];
        let p = fit.predictive(&q);
        let mut a = kernel_matrix(&x, &x, &k);
        for i in 0..x.len() {
            a[(i, i)] += 0.04;
        }
        let inv = a.try_inverse().unwrap();
        let ks = kernel_matrix(&x, &q, &k);
        let r = DVector::from_iterator(x.len(), y.iter().map(|v| v - 0.5));
        let mean = ks.transpose() * &inv * r + DVector::from_element(q.len(), 0.5);
        let cov = kernel_matrix(&q, &q, &k) - ks.transpose() * inv * ks;
        assert!((p.mean - &mean).norm() <= 1e-8 * mean.norm());
        assert!((p.cov - &cov).norm() <= 1e-8 * cov.norm());
    }

    #[test]
    fn noiseless_interpolation_and_prior_reversion() {
        let x = vec![0.0, 1.0, 2.5];
        let y = vec![1.0, -0.5, 2.0];
        let k = SquaredExponential::new(1.0, 1.0).unwrap();
        let fit = GpFit::new(x.clone(), y.clone(), k, 1e-12, ConstantMean(0.3)).unwrap();
        let p = fit.predictive(&x);
        for (m, t) in p.mean.iter().zip(&y) {
            assert!((m - t).abs() < 1e-6);
        }
        let far = fit.predictive(&[2.5 + 20.0]);
        assert!((far.mean[0] - 0.3).abs() < 1e-6);
        assert!((far.cov[(0, 0)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn realization_moments_match_predictive() {
        let (x, y) = random_problem(12, 9);
        let k = SquaredExponential::new(1.0, 1.5).unwrap();
        let fit = GpFit::new(x, y, k, 0.3, ConstantMean(0.0)).unwrap();
        let q = [0.5, 3.0, 6.0, 8.5];
        let p = fit.predictive(&q);
        let target_cov = &p.cov + DMatrix::identity(4, 4) * 0.09;
        let mut rng = rng_from_seed(10);
        let n = 10_000;
        let draws: Vec<DVector<f64>> = (0..n).map(|_| fit.sample_realization(&q, 0.3, &mut rng).unwrap()).collect();
        let mean = draws.iter().fold(DVector::zeros(4), |acc, d| acc + d) / n as f64;
        for i in 0..4 {
            let se = (target_cov[(i, i)] / n as f64).sqrt();
            assert!((mean[i] - p.mean[i]).abs() < 4.0 * se, "component {i}");
        }
        let mut cov = DMatrix::zeros(4, 4);
        for d in &draws {
            let c = d - &mean;
            cov += &c * c.transpose();
        }
        cov /= (n - 1) as f64;
        let rel = (cov - &target_cov).norm() / target_cov.norm();
        assert!(rel < 0.05, "frobenius error {rel}");
    }

    #[test]
    fn degenerate_sampling_returns_mean() {
        let k = SquaredExponential::new(0.0, 1.0).unwrap();
        let fit = GpFit::new(vec![0.0, 1.0], vec![3.0, 4.0], k, 0.0, ConstantMean(2.0)).unwrap();
        let mut rng = rng_from_seed(1);
        let s = fit.sample_realization(&[0.0, 0.5, 1.0], 0.0, &mut rng).unwrap();
        assert_eq!(s.as_slice(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn empty_conditioning_set_gives_prior_mean() {
        let k = SquaredExponential::new(1.0, 0.5).unwrap();
        let mean = ExponentialMean { beta0: 3.0, beta1: -2.0 };
        let fit = GpFit::new(vec![], vec![], k, 0.1, mean).unwrap();
        let j = fit.joint_value_derivative(&[0.0, 0.4]);
        assert_eq!(j.mean_value[0], 3.0);
        assert_eq!(j.mean_derivative[0], -6.0);
        assert!((j.mean_value[1] - 3.0 * (-0.8f64).exp()).abs() < 1e-15);
        assert!((j.mean_derivative[1] + 6.0 * (-0.8f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn derivative_mean_matches_finite_difference_of_value_mean() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| 5.0 * (-3.0 * v).exp() + 0.3 * (7.0 * v).cos()).collect();
        let k = SquaredExponential::new(0.5, 0.2).unwrap();
        let fit = GpFit::new(x, y, k, 0.05, ExponentialMean { beta0: 4.0, beta1: -2.5 }).unwrap();
        let h = 1e-5;
        for i in 0..40 {
            let q = i as f64 * 0.035 + 0.01;
            let j = fit.joint_value_derivative(&[q - h, q, q + h]);
            let fd = (j.mean_value[2] - j.mean_value[0]) / (2.0 * h);
            let an = j.mean_derivative[1];
            assert!((an - fd).abs() <= 1e-3 * an.abs().max(1e-3), "xi {q}: {an} vs {fd}");
        }
    }

    #[test]
    fn joint_covariance_is_valid() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v).exp()).collect();
        let k = SquaredExponential::new(0.3, 0.4).unwrap();
        let fit = GpFit::new(x, y, k, 0.01, ExponentialMean { beta0: 1.0, beta1: -1.0 }).unwrap();
        let j = fit.joint_value_derivative(&[0.0, 0.5, 1.0, 2.5]);
        assert_eq!(j.cov, j.cov.transpose());
        let eig = j.cov.clone().symmetric_eigenvalues();
        let max = eig.max();
        assert!(eig.min() >= -1e-8 * max);
        assert!(CholeskyFactor::new(j.cov.clone()).is_ok());
    }

    #[test]
    fn joint_sampling_moments_and_determinism() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * (-1.5 * v).exp()).collect();
        let k = SquaredExponential::new(0.2, 0.3).unwrap();
        let fit = GpFit::new(x, y, k, 0.05, ExponentialMean { beta0: 2.0, beta1: -1.0 }).unwrap();
        let j = fit.joint_value_derivative(&[0.0]);
        let n = 10_000;
        let mut rng = rng_from_seed(3);
        let (mut sv, mut sd) = (0.0, 0.0);
        for _ in 0..n {
            let (v, d) = sample_joint(&j, &mut rng).unwrap();
            sv += v[0];
            sd += d[0];
        }
        let se_v = (j.cov[(0, 0)] / n as f64).sqrt();
        let se_d = (j.cov[(1, 1)] / n as f64).sqrt();
        assert!((sv / n as f64 - j.mean_value[0]).abs() < 4.0 * se_v);
        assert!((sd / n as f64 - j.mean_derivative[0]).abs() < 4.0 * se_d);

        let a = sample_joint(&j, &mut rng_from_seed(77)).unwrap();
        let b = sample_joint(&j, &mut rng_from_seed(77)).unwrap();
        assert_eq!(a, b);

        let zero = JointPrediction {
            mean_value: DVector::from_element(1, 1.5),
            mean_derivative: DVector::from_element(1, -0.5),
            cov: DMatrix::zeros(2, 2),
        };
        let (v, d) = sample_joint(&zero, &mut rng).unwrap();
        assert_eq!((v[0], d[0]), (1.5, -0.5));
    }

    #[test]
    fn posterior_variance_never_exceeds_prior() {
        let (x, y) = random_problem(25, 12);
        let k = SquaredExponential::new(0.7, 0.9).unwrap();
        let fit = GpFit::new(x, y, k, 0.1, ConstantMean(0.0)).unwrap();
        let q: Vec<f64> = (0..60).map(|i| i as f64 * 0.2 - 1.0).collect();
        let p = fit.predictive(&q);
        for i in 0..q.len() {
            assert!(p.cov[(i, i)] <= 0.7 + 1e-12);
        }
    }

    #[test]
    fn log_likelihood_is_permutation_invariant() {
        let (x, y) = random_problem(15, 13);
        let k = SquaredExponential::new(1.0, 1.0).unwrap();
        let a = log_likelihood(&x, &y, &k, 0.2, &ConstantMean(0.1)).unwrap();
        let mut idx: Vec<usize> = (0..15).collect();
        idx.reverse();
        idx.swap(2, 9);
        let xp: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
        let yp: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        let b = log_likelihood(&xp, &yp, &k, 0.2, &ConstantMean(0.1)).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }
}
