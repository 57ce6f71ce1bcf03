use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::core_math::DataMatrix;
use crate::linalg::{random_orthonormal, rotate_diagonal};

/// Covariance returned when the data has zero total variance.
pub const DEGENERATE_SCALE: f64 = 1e-6;

/// Random covariance whose trace is `trace(Σ_X) / (10·D·K)` and whose
/// eigenvalue ratio is at most 10.
#[derive(Clone, Debug)]
pub struct RandomCovariance {
    d: usize,
    target_trace: f64,
}

/// One draw from [`RandomCovariance`].
#[derive(Clone, Debug, PartialEq)]
pub struct RandCovar {
    pub covariance: DMatrix<f64>,
    /// Set when the data had zero scatter and `1e-6 · I` was returned.
    pub degenerate: bool,
}

impl RandomCovariance {
    pub fn new(data: &DataMatrix, k: usize) -> Self {
        let d = data.d();
        let trace = data.covariance().trace();
        RandomCovariance {
            d,
            target_trace: trace / (10.0 * d as f64 * k.max(1) as f64),
        }
    }

    pub fn target_trace(&self) -> f64 {
        self.target_trace
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.target_trace > 0.0)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> RandCovar {
        if self.is_degenerate() {
            return RandCovar {
                covariance: DMatrix::identity(self.d, self.d) * DEGENERATE_SCALE,
                degenerate: true,
            };
        }
        let mut eig: Vec<f64> = (0..self.d).map(|_| rng.random_range(1.0..=10.0)).collect();
        let scale = self.target_trace / eig.iter().sum::<f64>();
        eig.iter_mut().for_each(|v| *v *= scale);
        let q = random_orthonormal(self.d, rng, |r| r.sample(StandardNormal));
        RandCovar {
            covariance: rotate_diagonal(&q, &eig),
            degenerate: false,
        }
    }
}

pub fn rand_covar<R: Rng + ?Sized>(data: &DataMatrix, k: usize, rng: &mut R) -> RandCovar {
    RandomCovariance::new(data, k).draw(rng)
}
