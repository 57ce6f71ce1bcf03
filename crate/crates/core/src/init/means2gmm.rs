use nalgebra::{DMatrix, DVector};

use crate::core_math::{cluster_covariance, DataMatrix, GaussianComponent, GmmParams};
use crate::error::{Error, Result};

use super::means::sq_dist;

/// Index of the nearest mean for every row; ties go to the lower mean index.
pub fn nearest_mean_partition(data: &DataMatrix, means: &[DVector<f64>]) -> Vec<usize> {
    data.rows()
        .map(|x| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, m) in means.iter().enumerate() {
                let d = sq_dist(x, m.as_slice());
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Completes K means into a mixture: partition by nearest mean, then fit
/// one Gaussian per cluster.
///
/// Singular cluster covariances fall back to a spherical estimate, then to
/// the identity. A mean that attracts no point keeps its position, gets an
/// identity covariance and weight `1/(2N)` before the weights are
/// renormalized.
pub fn means2gmm(data: &DataMatrix, means: &[DVector<f64>]) -> Result<GmmParams> {
    if means.is_empty() {
        return Err(Error::invalid("means2gmm needs at least one mean"));
    }
    let d = data.d();
    if let Some(m) = means.iter().find(|m| m.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: m.len(),
        });
    }
    let n = data.n();
    let assignment = nearest_mean_partition(data, means);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); means.len()];
    for (i, &k) in assignment.iter().enumerate() {
        members[k].push(i);
    }

    let mut any_empty = false;
    let components: Vec<GaussianComponent> = members
        .iter()
        .zip(means)
        .map(|(idx, seed)| {
            if idx.is_empty() {
                any_empty = true;
                let eye = DMatrix::<f64>::identity(d, d);
                return GaussianComponent::from_parts(
                    1.0 / (2.0 * n as f64),
                    seed.clone(),
                    eye.clone(),
                    eye,
                );
            }
            let mut centroid = DVector::<f64>::zeros(d);
            for &i in idx {
                for (c, x) in centroid.iter_mut().zip(data.row(i)) {
                    *c += x;
                }
            }
            centroid /= idx.len() as f64;
            let rows = idx.iter().map(|&i| data.row(i));
            let (cov, chol, _) = cluster_covariance(rows, &centroid, idx.len());
            GaussianComponent::from_parts(idx.len() as f64 / n as f64, centroid, cov, chol)
        })
        .collect();

    if any_empty {
        GmmParams::normalized(components)
    } else {
        GmmParams::new(components)
    }
}
