//! Cholesky factorization with escalating diagonal jitter.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// First jitter tried, relative to the mean diagonal.
pub const JITTER_START: f64 = 1e-10;
/// Largest jitter tried before giving up, relative to the mean diagonal.
pub const JITTER_MAX: f64 = 1e-4;

/// Lower Cholesky factor `L` of `A + jitter I`.
///
/// A matrix that is identically zero gets a zero factor; solves against it
/// return zero (the pseudo-inverse) and its log-determinant is `-inf`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    l: DMatrix<f64>,
    jitter: f64,
    zero: bool,
}

impl CholeskyFactor {
    /// Factor a symmetric matrix. Tries the matrix as given, then adds
    /// `1e-10 * mean(diag)` to the diagonal, escalating by 10x up to
    /// `1e-4 * mean(diag)`.
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        debug_assert_eq!(n, a.ncols());
        if n == 0 || a.iter().all(|&v| v == 0.0) {
            return Ok(Self {
                l: DMatrix::zeros(n, n),
                jitter: 0.0,
                zero: true,
            });
        }
        if let Some(c) = a.clone().cholesky() {
            return Ok(Self {
                l: c.unpack(),
                jitter: 0.0,
                zero: false,
            });
        }
        let mean_diag = a.diagonal().mean();
        if !(mean_diag > 0.0) || !mean_diag.is_finite() {
            return Err(Error::IllConditioned { jitter: 0.0 });
        }
        let mut rel = JITTER_START;
        loop {
            let jitter = rel * mean_diag;
            let mut b = a.clone();
            for i in 0..n {
                b[(i, i)] += jitter;
            }
            if let Some(c) = b.cholesky() {
                return Ok(Self {
                    l: c.unpack(),
                    jitter,
                    zero: false,
                });
            }
            if rel >= JITTER_MAX * (1.0 - 1e-12) {
                return Err(Error::IllConditioned { jitter });
            }
            rel *= 10.0;
        }
    }

    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Diagonal jitter that was added (0 if none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `L^{-1} b`.
    pub fn solve_lower(&self, b: &DVector<f64>) -> DVector<f64> {
        if self.zero {
            return DVector::zeros(b.len());
        }
        self.l.solve_lower_triangular(b).expect("factor has a positive diagonal")
    }

    /// `L^{-1} B`.
    pub fn solve_lower_mat(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        if self.zero {
            return DMatrix::zeros(b.nrows(), b.ncols());
        }
        self.l.solve_lower_triangular(b).expect("factor has a positive diagonal")
    }

    /// `A^{-1} b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        if self.zero {
            return DVector::zeros(b.len());
        }
        let y = self.solve_lower(b);
        self.l.tr_solve_lower_triangular(&y).expect("factor has a positive diagonal")
    }

    /// `log |A|` from the factor diagonal.
    pub fn log_det(&self) -> f64 {
        if self.zero {
            return f64::NEG_INFINITY;
        }
        2.0 * self.l.diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }
}
