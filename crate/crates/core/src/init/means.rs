//! Mean selectors for hard clustering: uniform, K-means++ and Gonzalez.

use nalgebra::DVector;
use rand::Rng;

use crate::core_math::DataMatrix;
use crate::error::{Error, Result};

use super::draw_weighted;

pub(crate) fn check_k(data: &DataMatrix, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::invalid("K must be at least 1"));
    }
    if k > data.n() {
        return Err(Error::invalid(format!(
            "K = {k} exceeds the number of points N = {}",
            data.n()
        )));
    }
    Ok(())
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rows_to_means(data: &DataMatrix, indices: &[usize]) -> Vec<DVector<f64>> {
    indices
        .iter()
        .map(|&i| DVector::from_column_slice(data.row(i)))
        .collect()
}

/// Row indices of K distinct points drawn uniformly without replacement.
pub fn uniform_indices<R: Rng + ?Sized>(data: &DataMatrix, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_k(data, k)?;
    Ok(rand::seq::index::sample(rng, data.n(), k).into_vec())
}

pub fn uniform_means<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>> {
    Ok(rows_to_means(data, &uniform_indices(data, k, rng)?))
}

/// K-means++ (D² sampling). Row indices in selection order.
///
/// When every point coincides with a chosen mean the next mean is drawn
/// uniformly from the points not chosen yet.
pub fn kmeanspp_indices<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_k(data, k)?;
    let n = data.n();
    let first = rng.random_range(0..n);
    kmeanspp_from(data, k, first, rng)
}

/// K-means++ continuing from a fixed first mean.
pub fn kmeanspp_from<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    first: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_k(data, k)?;
    let n = data.n();
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let mut cost = vec![f64::INFINITY; n];
    let add = |idx: usize, chosen: &mut Vec<usize>, cost: &mut [f64], taken: &mut [bool]| {
        chosen.push(idx);
        taken[idx] = true;
        let c = data.row(idx);
        for (i, slot) in cost.iter_mut().enumerate() {
            let d = sq_dist(data.row(i), c);
            if d < *slot {
                *slot = d;
            }
        }
    };
    add(first, &mut chosen, &mut cost, &mut taken);
    while chosen.len() < k {
        let next = match draw_weighted(&cost, rng) {
            Some(i) => i,
            None => {
                let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        add(next, &mut chosen, &mut cost, &mut taken);
    }
    Ok(chosen)
}

pub fn kmeanspp_means<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>> {
    Ok(rows_to_means(data, &kmeanspp_indices(data, k, rng)?))
}

/// Farthest-first traversal. Row indices in selection order.
pub fn gonzalez_indices<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_k(data, k)?;
    let first = rng.random_range(0..data.n());
    gonzalez_from(data, k, first)
}

/// Farthest-first traversal from a fixed first mean; ties go to the lowest
/// row index among points not chosen yet.
pub fn gonzalez_from(data: &DataMatrix, k: usize, first: usize) -> Result<Vec<usize>> {
    check_k(data, k)?;
    let n = data.n();
    let mut taken = vec![false; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut chosen = Vec::with_capacity(k);
    let mut next = first;
    loop {
        chosen.push(next);
        taken[next] = true;
        if chosen.len() == k {
            break;
        }
        let c = data.row(next);
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            let d = sq_dist(data.row(i), c);
            if d < dist[i] {
                dist[i] = d;
            }
            if !taken[i] && best.is_none_or(|(_, bd)| dist[i] > bd) {
                best = Some((i, dist[i]));
            }
        }
        next = best.expect("K <= N leaves an unchosen point").0;
    }
    Ok(chosen)
}

pub fn gonzalez_means<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>> {
    Ok(rows_to_means(data, &gonzalez_indices(data, k, rng)?))
}
