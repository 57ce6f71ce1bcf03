use rand::Rng;

use crate::core_math::{min_mahalanobis_with, mle_single_gaussian, DataMatrix, GmmParams};
use crate::error::{Error, Result};

use super::draw_weighted;
use super::means::check_k;
use super::means2gmm::means2gmm;

/// Probability vector `m_{α,S}(· | θ)` over the rows of a subset `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDensity {
    weights: Vec<f64>,
}

impl SampleDensity {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        draw_weighted(&self.weights, rng).expect("density has positive mass")
    }
}

/// `m_{α,S}(x | θ) = α m₁(x|θ) / Σ_{y∈S} m₁(y|θ) + (1 − α) / |S|`.
///
/// If every point of `S` has `m₁ = 0` the density is uniform.
pub fn sample_density(subset: &DataMatrix, theta: &GmmParams, alpha: f64) -> Result<SampleDensity> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1]")));
    }
    if subset.d() != theta.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            found: subset.d(),
        });
    }
    let m = subset.n() as f64;
    let mut buf = vec![0.0; subset.d()];
    let m1: Vec<f64> = subset
        .rows()
        .map(|x| min_mahalanobis_with(x, theta.components(), &mut buf))
        .collect();
    let total: f64 = m1.iter().sum();
    let weights = if total > 0.0 && total.is_finite() {
        m1.iter()
            .map(|v| alpha * v / total + (1.0 - alpha) / m)
            .collect()
    } else {
        vec![1.0 / m; subset.n()]
    };
    Ok(SampleDensity { weights })
}

/// K-means++ adapted to mixtures: grow the model one component at a time,
/// drawing the new mean from `m_{α,X}` and refitting with Means2GMM.
pub fn adaptive_init<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<GmmParams> {
    check_k(data, k)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1]")));
    }
    let mut theta = GmmParams::new(vec![mle_single_gaussian(data)])?;
    for _ in 1..k {
        let density = sample_density(data, &theta, alpha)?;
        let mut means = theta.means();
        let mut p = density.draw(rng);
        let mut attempts = 1;
        while attempts < data.n() && means.iter().any(|m| m.as_slice() == data.row(p)) {
            p = density.draw(rng);
            attempts += 1;
        }
        means.push(nalgebra::DVector::from_column_slice(data.row(p)));
        theta = means2gmm(data, &means)?;
    }
    Ok(theta)
}
