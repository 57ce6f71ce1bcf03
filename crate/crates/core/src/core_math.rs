//! Gaussian densities, mixture likelihood, and the closed-form single
//! Gaussian maximum-likelihood fit.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cholesky_unchecked, forward_solve_in_place};

pub use crate::linalg::cholesky;

/// Tolerance on `Σ w_k = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// `N × D` observations stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl DataMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in &rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::from_row_major(d, values)
    }

    pub fn from_row_major(d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("data dimension must be at least 1"));
        }
        if values.is_empty() {
            return Err(Error::invalid("data set must contain at least one point"));
        }
        if !values.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "{} values do not form rows of dimension {d}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry in row {}",
                pos / d
            )));
        }
        let n = values.len() / d;
        Ok(DataMatrix { values, n, d })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + Clone + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// The rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> DataMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        DataMatrix {
            values,
            n: indices.len(),
            d: self.d,
        }
    }

    pub fn mean(&self) -> DVector<f64> {
        let mut mean = DVector::zeros(self.d);
        for row in self.rows() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        mean / self.n as f64
    }

    /// Biased (1/N) sample covariance.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        scatter(self.rows(), &mean) / self.n as f64
    }
}

/// `Σ (x - μ)(x - μ)ᵀ` over `rows`, filled symmetrically.
pub(crate) fn scatter<'a>(rows: impl Iterator<Item = &'a [f64]>, mean: &DVector<f64>) -> DMatrix<f64> {
    let d = mean.len();
    let mut s = DMatrix::<f64>::zeros(d, d);
    let mut diff = vec![0.0; d];
    for row in rows {
        for (k, v) in diff.iter_mut().enumerate() {
            *v = row[k] - mean[k];
        }
        for i in 0..d {
            for j in 0..=i {
                s[(i, j)] += diff[i] * diff[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            s[(j, i)] = s[(i, j)];
        }
    }
    s
}

/// Which estimate a fitted covariance came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovarianceSource {
    Sample,
    Spherical,
    Identity,
}

/// Per-cluster 1-MLE covariance with the spherical-then-identity fallback.
///
/// Returns the covariance together with its Cholesky factor.
pub(crate) fn cluster_covariance<'a>(
    rows: impl Iterator<Item = &'a [f64]> + Clone,
    mean: &DVector<f64>,
    count: usize,
) -> (DMatrix<f64>, DMatrix<f64>, CovarianceSource) {
    let d = mean.len();
    if count > 0 {
        let cov = scatter(rows.clone(), mean) / count as f64;
        if let Some(chol) = cholesky_unchecked(&cov) {
            return (cov, chol, CovarianceSource::Sample);
        }
        let sq: f64 = rows
            .map(|row| row.iter().zip(mean.iter()).map(|(x, m)| (x - m) * (x - m)).sum::<f64>())
            .sum();
        let var = sq / (d * count) as f64;
        let cov = DMatrix::<f64>::identity(d, d) * var;
        if let Some(chol) = cholesky_unchecked(&cov) {
            return (cov, chol, CovarianceSource::Spherical);
        }
    }
    let eye = DMatrix::<f64>::identity(d, d);
    (eye.clone(), eye, CovarianceSource::Identity)
}

/// One weighted Gaussian with a cached Cholesky factor of its covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianComponent {
    weight: f64,
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    chol: DMatrix<f64>,
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::invalid(format!("weight {weight} outside [0, 1]")));
        }
        let d = mean.len();
        if d == 0 {
            return Err(Error::invalid("component dimension must be at least 1"));
        }
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: covariance.nrows(),
            });
        }
        if mean.iter().any(|v| !v.is_finite()) || covariance.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("component parameters must be finite"));
        }
        let chol = linalg::cholesky(&covariance)?.ok_or(Error::NotPositiveDefinite)?;
        Ok(GaussianComponent {
            weight,
            mean,
            covariance,
            chol,
        })
    }

    pub(crate) fn from_parts(
        weight: f64,
        mean: DVector<f64>,
        covariance: DMatrix<f64>,
        chol: DMatrix<f64>,
    ) -> Self {
        GaussianComponent {
            weight,
            mean,
            covariance,
            chol,
        }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Lower-triangular factor `L` with `L Lᵀ = Σ`.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.chol[(i, i)].ln()).sum::<f64>()
    }

    /// Replaces the covariance and refreshes the cached factor.
    pub fn set_covariance(&mut self, covariance: DMatrix<f64>) -> Result<()> {
        let d = self.dim();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: covariance.nrows(),
            });
        }
        let chol = linalg::cholesky(&covariance)?.ok_or(Error::NotPositiveDefinite)?;
        self.covariance = covariance;
        self.chol = chol;
        Ok(())
    }

    pub(crate) fn set_weight(&mut self, weight: f64) {
        self.weight = weight;
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn mahalanobis_sq_with(&self, x: &[f64], buf: &mut [f64]) -> f64 {
        for (k, v) in buf.iter_mut().enumerate() {
            *v = x[k] - self.mean[k];
        }
        forward_solve_in_place(&self.chol, buf);
        buf.iter().map(|v| v * v).sum()
    }

    /// `log N(x | μ, Σ)` without the weight; `half_log_norm` is
    /// `(D/2) log 2π + ½ log|Σ|`.
    #[inline]
    pub(crate) fn log_pdf_with(&self, x: &[f64], half_log_norm: f64, buf: &mut [f64]) -> f64 {
        -half_log_norm - 0.5 * self.mahalanobis_sq_with(x, buf)
    }

    pub(crate) fn half_log_norm(&self) -> f64 {
        0.5 * self.dim() as f64 * (2.0 * PI).ln() + 0.5 * self.log_det()
    }
}

/// Mixture parameters `{(w_k, μ_k, Σ_k)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GmmParams {
    components: Vec<GaussianComponent>,
}

impl GmmParams {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let params = GmmParams { components };
        params.validate()?;
        Ok(params)
    }

    /// Builds a mixture after rescaling the weights to sum to one.
    pub fn normalized(mut components: Vec<GaussianComponent>) -> Result<Self> {
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::invalid("component weights must have a positive sum"));
        }
        for c in &mut components {
            c.weight /= total;
        }
        GmmParams::new(components)
    }

    /// Checks every mixture invariant: K ≥ 1, equal dimensions, weights on
    /// the simplex, and each covariance symmetric positive definite with a
    /// factor that reproduces it.
    pub fn validate(&self) -> Result<()> {
        let first = self
            .components
            .first()
            .ok_or_else(|| Error::invalid("a mixture needs at least one component"))?;
        let d = first.dim();
        let mut total = 0.0;
        for c in &self.components {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.dim(),
                });
            }
            if !(0.0..=1.0).contains(&c.weight) {
                return Err(Error::invalid(format!("weight {} outside [0, 1]", c.weight)));
            }
            let asym = linalg::asymmetry(&c.covariance);
            if asym > linalg::SYMMETRY_TOL {
                return Err(Error::NotSymmetric(asym));
            }
            let rebuilt = &c.chol * c.chol.transpose();
            let rel = (&rebuilt - &c.covariance).norm() / c.covariance.norm();
            if !(rel <= 1e-10) {
                return Err(Error::NotPositiveDefinite);
            }
            if cholesky_unchecked(&c.covariance).is_none() {
                return Err(Error::NotPositiveDefinite);
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn into_components(self) -> Vec<GaussianComponent> {
        self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn means(&self) -> Vec<DVector<f64>> {
        self.components.iter().map(|c| c.mean.clone()).collect()
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: d,
            });
        }
        Ok(())
    }
}

/// Plain-data view of a mixture, used for (de)serialization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureFile {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Each covariance flattened row-major.
    pub covariances: Vec<Vec<f64>>,
}

impl From<&GmmParams> for MixtureFile {
    fn from(theta: &GmmParams) -> Self {
        let d = theta.dim();
        MixtureFile {
            weights: theta.weights(),
            means: theta
                .components()
                .iter()
                .map(|c| c.mean().iter().copied().collect())
                .collect(),
            covariances: theta
                .components()
                .iter()
                .map(|c| {
                    let cov = c.covariance();
                    (0..d)
                        .flat_map(|i| (0..d).map(move |j| cov[(i, j)]))
                        .collect()
                })
                .collect(),
        }
    }
}

impl TryFrom<MixtureFile> for GmmParams {
    type Error = Error;

    fn try_from(file: MixtureFile) -> Result<Self> {
        if file.weights.len() != file.means.len() || file.weights.len() != file.covariances.len() {
            return Err(Error::invalid(
                "weights, means and covariances must have the same length",
            ));
        }
        let components = file
            .weights
            .into_iter()
            .zip(file.means)
            .zip(file.covariances)
            .map(|((w, mean), cov)| {
                let d = mean.len();
                if cov.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: d * d,
                        found: cov.len(),
                    });
                }
                GaussianComponent::new(
                    w,
                    DVector::from_vec(mean),
                    DMatrix::from_row_slice(d, d, &cov),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        GmmParams::new(components)
    }
}

/// Numerically stable `log Σ exp(v)`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

pub fn gaussian_log_pdf(x: &[f64], comp: &GaussianComponent) -> Result<f64> {
    comp.check_dim(x)?;
    let mut buf = vec![0.0; x.len()];
    Ok(comp.log_pdf_with(x, comp.half_log_norm(), &mut buf))
}

pub fn mahalanobis_sq(x: &[f64], comp: &GaussianComponent) -> Result<f64> {
    comp.check_dim(x)?;
    let mut buf = vec![0.0; x.len()];
    Ok(comp.mahalanobis_sq_with(x, &mut buf))
}

/// `m₁(x | θ)`: smallest squared Mahalanobis distance to any component.
pub fn min_mahalanobis(x: &[f64], theta: &GmmParams) -> Result<f64> {
    theta.check_dim(x.len())?;
    let mut buf = vec![0.0; x.len()];
    Ok(min_mahalanobis_with(x, theta.components(), &mut buf))
}

pub(crate) fn min_mahalanobis_with(x: &[f64], comps: &[GaussianComponent], buf: &mut [f64]) -> f64 {
    comps
        .iter()
        .map(|c| c.mahalanobis_sq_with(x, buf))
        .fold(f64::INFINITY, f64::min)
}

/// Precomputed per-component terms for repeated density evaluation.
pub(crate) struct MixtureEvaluator<'a> {
    comps: &'a [GaussianComponent],
    // log w_k - (D/2) log 2π - ½ log|Σ_k|
    offsets: Vec<f64>,
    buf: Vec<f64>,
}

impl<'a> MixtureEvaluator<'a> {
    pub(crate) fn new(theta: &'a GmmParams) -> Self {
        let offsets = theta
            .components()
            .iter()
            .map(|c| c.weight.ln() - c.half_log_norm())
            .collect();
        MixtureEvaluator {
            comps: theta.components(),
            offsets,
            buf: vec![0.0; theta.dim()],
        }
    }

    /// Fills `out[k] = log w_k + log N(x | μ_k, Σ_k)` and returns the
    /// mixture log-density.
    pub(crate) fn joint_log(&mut self, x: &[f64], out: &mut [f64]) -> f64 {
        for (k, c) in self.comps.iter().enumerate() {
            out[k] = self.offsets[k] - 0.5 * c.mahalanobis_sq_with(x, &mut self.buf);
        }
        log_sum_exp(out)
    }
}

pub fn mixture_log_pdf(x: &[f64], theta: &GmmParams) -> Result<f64> {
    theta.check_dim(x.len())?;
    let mut eval = MixtureEvaluator::new(theta);
    let mut out = vec![0.0; theta.k()];
    Ok(eval.joint_log(x, &mut out))
}

/// `L(X, θ) = Σ_n log N(x_n | θ)`.
pub fn log_likelihood(data: &DataMatrix, theta: &GmmParams) -> Result<f64> {
    theta.check_dim(data.d())?;
    Ok(log_likelihood_unchecked(data, theta))
}

pub(crate) fn log_likelihood_unchecked(data: &DataMatrix, theta: &GmmParams) -> f64 {
    let mut eval = MixtureEvaluator::new(theta);
    let mut out = vec![0.0; theta.k()];
    data.rows().map(|x| eval.joint_log(x, &mut out)).sum()
}

/// Closed-form maximum-likelihood single Gaussian (weight 1, biased
/// covariance), falling back to a spherical and then identity covariance
/// when the sample covariance is singular.
pub fn mle_single_gaussian(data: &DataMatrix) -> GaussianComponent {
    let mean = data.mean();
    let (cov, chol, _) = cluster_covariance(data.rows(), &mean, data.n());
    GaussianComponent::from_parts(1.0, mean, cov, chol)
}
