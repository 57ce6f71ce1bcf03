//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry contract on covariance inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Pivots at or below `PIVOT_TOL * max(diag)` count as "not positive definite".
pub const PIVOT_TOL: f64 = 1e-12;

/// Largest `|a_ij - a_ji|` relative to the largest absolute entry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let scale = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Lower-triangular Cholesky factor of a symmetric matrix.
///
/// Returns `Ok(None)` when the matrix is not positive definite, i.e. some
/// pivot falls at or below `PIVOT_TOL * max(diag)`. Asymmetric or
/// non-square input is a contract violation.
pub fn cholesky(m: &DMatrix<f64>) -> Result<Option<DMatrix<f64>>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    let asym = asymmetry(m);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(cholesky_unchecked(m))
}

pub(crate) fn cholesky_unchecked(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let max_diag = (0..n).fold(f64::NEG_INFINITY, |acc, i| acc.max(m[(i, i)]));
    if !(max_diag > 0.0) || !max_diag.is_finite() {
        return None;
    }
    let threshold = PIVOT_TOL * max_diag;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > threshold) {
            return None;
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            // read the lower triangle only
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L y = b` in place for lower-triangular `L`.
pub(crate) fn forward_solve_in_place(l: &DMatrix<f64>, b: &mut [f64]) {
    let n = b.len();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Random orthonormal matrix from the QR decomposition of a matrix whose
/// entries come from `entry`. Column signs are fixed so that `R` has a
/// positive diagonal.
pub fn random_orthonormal<R, F>(d: usize, rng: &mut R, mut entry: F) -> DMatrix<f64>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> f64,
{
    let mut a = DMatrix::<f64>::zeros(d, d);
    // row-major fill keeps the draw order independent of storage layout
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = entry(rng);
        }
    }
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Qᵀ diag(values) Q`, symmetrized.
pub fn rotate_diagonal(q: &DMatrix<f64>, values: &[f64]) -> DMatrix<f64> {
    let d = values.len();
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values));
    let m = q.transpose() * lambda * q;
    debug_assert_eq!(m.nrows(), d);
    symmetrize(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_factor_is_identity() {
        let eye = DMatrix::<f64>::identity(4, 4);
        assert_eq!(cholesky(&eye).unwrap().unwrap(), eye);
    }

    #[test]
    fn hand_computed_factor() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 3.0]);
        let l = cholesky(&m).unwrap().unwrap();
        assert!((l[(0, 0)] - 2.0).abs() < 1e-15);
        assert_eq!(l[(0, 1)], 0.0);
        assert!((l[(1, 0)] - 1.0).abs() < 1e-15);
        assert!((l[(1, 1)] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn indefinite_is_signalled_not_errored() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky(&m).unwrap().is_none());
        assert!(cholesky(&DMatrix::zeros(3, 3)).unwrap().is_none());
    }

    #[test]
    fn asymmetric_is_a_contract_violation() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(matches!(cholesky(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn orthonormal_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_orthonormal(5, &mut rng, |r| r.random::<f64>());
        let qtq = q.transpose() * &q;
        assert!((qtq - DMatrix::<f64>::identity(5, 5)).norm() < 1e-12);
    }
}
