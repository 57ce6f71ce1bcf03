#![allow(dead_code)]

use gmm_init::{DataMatrix, GaussianComponent};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gauss-Jordan inverse and determinant with partial pivoting.
pub fn inverse_and_det(m: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())
            .unwrap();
        if p != c {
            a.swap(p, c);
            inv.swap(p, c);
            det = -det;
        }
        let piv = a[c][c];
        det *= piv;
        for j in 0..n {
            a[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for j in 0..n {
                    a[r][j] -= f * a[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    (inv, det)
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// (x-μ)ᵀ Σ⁻¹ (x-μ) through the dense inverse.
pub fn dense_mahalanobis(x: &[f64], mu: &[f64], cov: &DMatrix<f64>) -> f64 {
    let (inv, _) = inverse_and_det(&to_rows(cov));
    let d: Vec<f64> = x.iter().zip(mu).map(|(a, b)| a - b).collect();
    let mut s = 0.0;
    for i in 0..d.len() {
        for j in 0..d.len() {
            s += d[i] * inv[i][j] * d[j];
        }
    }
    s
}

/// Gaussian density (not log) by the textbook formula.
pub fn dense_pdf(x: &[f64], mu: &[f64], cov: &DMatrix<f64>) -> f64 {
    let (_, det) = inverse_and_det(&to_rows(cov));
    let dim = x.len() as f64;
    let q = dense_mahalanobis(x, mu, cov);
    (-0.5 * q).exp() / ((2.0 * std::f64::consts::PI).powf(dim / 2.0) * det.sqrt())
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix, ascending.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = to_rows(m);
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

pub fn random_spd<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(d, d) * 0.5
}

pub fn random_component<R: Rng>(weight: f64, d: usize, rng: &mut R) -> GaussianComponent {
    let mean = DVector::from_fn(d, |_, _| rng.random_range(-3.0..3.0));
    GaussianComponent::new(weight, mean, random_spd(d, rng)).unwrap()
}

pub fn random_data<R: Rng>(n: usize, d: usize, rng: &mut R) -> DataMatrix {
    DataMatrix::new(
        (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect(),
    )
    .unwrap()
}

/// Points around `centers` with unit-box jitter.
pub fn blobs<R: Rng>(centers: &[Vec<f64>], per: usize, spread: f64, rng: &mut R) -> DataMatrix {
    let mut rows = Vec::new();
    for c in centers {
        for _ in 0..per {
            rows.push(c.iter().map(|v| v + spread * rng.random_range(-1.0..1.0)).collect());
        }
    }
    DataMatrix::new(rows).unwrap()
}
