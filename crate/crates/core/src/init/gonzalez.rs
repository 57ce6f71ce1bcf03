//! Gonzalez-style initializers that pick the point of a uniform subsample
//! with the most extreme minimum Mahalanobis distance.

use nalgebra::DVector;
use rand::Rng;

use crate::core_math::{
    min_mahalanobis_with, mle_single_gaussian, DataMatrix, GaussianComponent, GmmParams,
};
use crate::error::{Error, Result};

use super::means2gmm::means2gmm;
use super::rand_covar::RandomCovariance;

/// Picks the minimum instead of the maximum when the `argmin-selection`
/// feature is enabled.
pub const SELECT_MIN: bool = cfg!(feature = "argmin-selection");

/// `⌈s·N⌉`.
pub fn sample_size(n: usize, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "sample fraction s = {fraction} outside (0, 1]"
        )));
    }
    Ok(((fraction * n as f64).ceil() as usize).clamp(1, n))
}

/// Uniform subsample without replacement, returned in ascending row order.
pub fn subsample_indices<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    let m = sample_size(data.n(), fraction)?;
    if k > m {
        return Err(Error::invalid(format!(
            "K = {k} exceeds the sample size ⌈s·N⌉ = {m}"
        )));
    }
    let mut idx = rand::seq::index::sample(rng, data.n(), m).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Position in `scores` of the extreme value; ties go to the first.
pub(crate) fn extreme_position(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in scores.iter().enumerate().skip(1) {
        let better = if SELECT_MIN {
            v < scores[best]
        } else {
            v > scores[best]
        };
        if better {
            best = i;
        }
    }
    best
}

/// Gonzalez adapted to mixtures: start from the 1-MLE, repeatedly add the
/// subsample point farthest (in `m₁`) from the current model, and refit on
/// the full data with Means2GMM.
pub fn gonzalez_for_gmm<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    fraction: f64,
    rng: &mut R,
) -> Result<GmmParams> {
    let sample = subsample_indices(data, k, fraction, rng)?;
    let mut theta = GmmParams::new(vec![mle_single_gaussian(data)])?;
    let mut buf = vec![0.0; data.d()];
    let mut scores = vec![0.0; sample.len()];
    for _ in 1..k {
        for (s, &i) in scores.iter_mut().zip(&sample) {
            *s = min_mahalanobis_with(data.row(i), theta.components(), &mut buf);
        }
        let p = sample[extreme_position(&scores)];
        let mut means = theta.means();
        means.push(DVector::from_column_slice(data.row(p)));
        theta = means2gmm(data, &means)?;
    }
    Ok(theta)
}

/// Kwedlo's Gonzalez variant: means by farthest-`m₁` traversal of the
/// subsample, random covariances, and uniformly drawn normalized weights.
pub fn kwedlos_gonzalez<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    fraction: f64,
    rng: &mut R,
) -> Result<GmmParams> {
    let sample = subsample_indices(data, k, fraction, rng)?;
    let covar = RandomCovariance::new(data, k);
    let mut buf = vec![0.0; data.d()];

    let first = sample[rng.random_range(0..sample.len())];
    let mut comps = Vec::with_capacity(k);
    let push = |row: &[f64], comps: &mut Vec<GaussianComponent>, rng: &mut R| -> Result<()> {
        let cov = covar.draw(rng).covariance;
        comps.push(GaussianComponent::new(1.0, DVector::from_column_slice(row), cov)?);
        Ok(())
    };
    push(data.row(first), &mut comps, rng)?;

    // m₁ ignores weights, so track the running minimum per sample point
    let mut scores: Vec<f64> = sample
        .iter()
        .map(|&i| min_mahalanobis_with(data.row(i), &comps, &mut buf))
        .collect();
    for _ in 1..k {
        let p = sample[extreme_position(&scores)];
        push(data.row(p), &mut comps, rng)?;
        let newest = std::slice::from_ref(comps.last().expect("just pushed"));
        for (s, &i) in scores.iter_mut().zip(&sample) {
            *s = s.min(min_mahalanobis_with(data.row(i), newest, &mut buf));
        }
    }

    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    for (c, w) in comps.iter_mut().zip(&raw) {
        c.set_weight(if total > 0.0 { w / total } else { 1.0 / k as f64 });
    }
    GmmParams::normalized(comps)
}
