/// Sample autocorrelation at lags `0..=max_lag`.
pub fn autocorrelation(xs: &[f64], max_lag: usize) -> Vec<f64> {
    if xs.is_empty() {
        return Vec::new();
    }
    let acf = Acf::new(xs);
    (0..=max_lag.min(xs.len() - 1)).map(|k| acf.at(k)).collect()
}

struct Acf {
    centered: Vec<f64>,
    c0: f64,
}

impl Acf {
    fn new(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let centered: Vec<f64> = xs.iter().map(|x| x - mean).collect();
        let c0 = centered.iter().map(|v| v * v).sum::<f64>() / n;
        Self { centered, c0 }
    }

    fn at(&self, k: usize) -> f64 {
        if self.c0 == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let c = &self.centered;
        let n = c.len();
        c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64 / self.c0
    }
}

/// Effective sample size by Geyer's initial positive sequence: sum pairs of
/// autocorrelations until a pair sum turns non-positive.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let acf = Acf::new(xs);
    if acf.c0 == 0.0 {
        return n as f64;
    }
    let mut tau = -1.0;
    let mut k = 0;
    while k + 1 < n {
        let pair = acf.at(k) + acf.at(k + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        k += 2;
    }
    (n as f64 / tau.max(1.0 / n as f64)).min(n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn iid_draws_have_full_ess() {
        let mut rng = rng_from_seed(1);
        let xs: Vec<f64> = (0..5000).map(|_| rng.sample(StandardNormal)).collect();
        let ess = effective_sample_size(&xs);
        assert!(ess > 4000.0, "{ess}");
    }

    #[test]
    fn ar1_matches_theory() {
        // AR(1) with coefficient r has ESS about n (1 - r) / (1 + r).
        let r = 0.9;
        let mut rng = rng_from_seed(2);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = r * x + rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect();
        let expected = 200_000.0 * (1.0 - r) / (1.0 + r);
        let ess = effective_sample_size(&xs);
        assert!((ess / expected - 1.0).abs() < 0.2, "{ess} vs {expected}");
    }

    #[test]
    fn constant_chain() {
        assert_eq!(effective_sample_size(&[2.0; 10]), 10.0);
        assert_eq!(autocorrelation(&[1.0, 1.0], 1), vec![1.0, 0.0]);
    }
}
