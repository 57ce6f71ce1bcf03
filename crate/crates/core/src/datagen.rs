//! Random Gaussian mixtures with controlled separation, eccentricity,
//! component sizes and weight skew, plus point sampling with uniform noise.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::core_math::{DataMatrix, GaussianComponent, GmmParams};
use crate::error::{Error, Result};
use crate::linalg::{random_orthonormal, rotate_diagonal};

/// Side-length growth of the noise box around the signal bounding box.
pub const NOISE_BOX_FACTOR: f64 = 1.2;

/// Weight exponent used for the "different weights" test sets.
pub const SKEWED_WEIGHT_EXPONENT: f64 = 0.5;

/// Eccentricity `e_k = max_d λ_kd / min_d λ_kd`, where `λ_kd²` are the
/// covariance eigenvalues.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EccentricityMode {
    Fixed(f64),
    /// Per component, uniform in `[lo, hi]`.
    Range(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SizeMode {
    /// Minimum axis scale 1 for every component.
    Constant,
    /// Minimum axis scale `2^(k-1)` for component `k = 1..K`.
    Different,
}

/// Recipe for one random mixture and the data set drawn from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub k: usize,
    pub d: usize,
    pub separation: f64,
    pub weight_exponent: f64,
    pub eccentricity: EccentricityMode,
    pub size: SizeMode,
    /// Side of the cube the means are first drawn from; `None` means
    /// `100 · K^(1/D)`.
    pub cube_side: Option<f64>,
    pub n_points: usize,
    pub noise_fraction: f64,
    pub seed: u64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            k: 10,
            d: 2,
            separation: 1.0,
            weight_exponent: 0.0,
            eccentricity: EccentricityMode::Fixed(1.0),
            size: SizeMode::Constant,
            cube_side: None,
            n_points: 10_000,
            noise_fraction: 0.0,
            seed: 0,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.d == 0 || self.n_points == 0 {
            return Err(Error::invalid("K, D and n_points must be at least 1"));
        }
        if !(self.separation > 0.0) || !self.separation.is_finite() {
            return Err(Error::invalid(format!(
                "separation {} must be positive",
                self.separation
            )));
        }
        if !self.weight_exponent.is_finite() {
            return Err(Error::invalid("weight exponent must be finite"));
        }
        match self.eccentricity {
            EccentricityMode::Fixed(e) if !(e >= 1.0) || !e.is_finite() => {
                return Err(Error::invalid(format!("eccentricity {e} must be >= 1")));
            }
            EccentricityMode::Range(lo, hi) if !(lo >= 1.0 && hi >= lo && hi.is_finite()) => {
                return Err(Error::invalid(format!("eccentricity range [{lo}, {hi}] invalid")));
            }
            _ => {}
        }
        if let Some(side) = self.cube_side {
            if !(side > 0.0) || !side.is_finite() {
                return Err(Error::invalid("cube side must be positive"));
            }
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(Error::invalid(format!(
                "noise fraction {} outside [0, 1)",
                self.noise_fraction
            )));
        }
        Ok(())
    }

    fn side(&self) -> f64 {
        self.cube_side
            .unwrap_or_else(|| 100.0 * (self.k as f64).powf(1.0 / self.d as f64))
    }

    /// Points drawn from the mixture (the rest are noise).
    pub fn signal_points(&self) -> usize {
        ((1.0 - self.noise_fraction) * self.n_points as f64).round() as usize
    }
}

/// One row of the test-set overview: weight, size and eccentricity
/// settings; each is combined with every separation in [`SEPARATIONS`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestSetRow {
    pub family: &'static str,
    pub skewed_weights: bool,
    pub size: SizeMode,
    pub eccentricity: EccentricityMode,
}

pub const SEPARATIONS: [f64; 3] = [0.5, 1.0, 2.0];

pub fn test_set_rows() -> Vec<TestSetRow> {
    use EccentricityMode::{Fixed, Range};
    use SizeMode::{Constant, Different};
    let row = |family, skewed_weights, size, eccentricity| TestSetRow {
        family,
        skewed_weights,
        size,
        eccentricity,
    };
    vec![
        row("spherical", false, Constant, Fixed(1.0)),
        row("spherical", true, Constant, Fixed(1.0)),
        row("spherical", false, Different, Fixed(1.0)),
        row("spherical", true, Different, Fixed(1.0)),
        row("elliptical", false, Constant, Fixed(2.0)),
        row("elliptical", false, Constant, Fixed(5.0)),
        row("elliptical", false, Constant, Fixed(10.0)),
        row("elliptical-difficult", false, Different, Fixed(5.0)),
        row("elliptical-difficult", true, Constant, Fixed(5.0)),
        row("elliptical-difficult", false, Different, Range(1.0, 10.0)),
    ]
}

/// Every (row, separation) test set as a generator spec sharing `base`'s
/// K, D, size, noise and seed.
pub fn test_set_specs(base: &GeneratorSpec) -> Vec<(String, GeneratorSpec)> {
    let mut out = Vec::new();
    for (r, row) in test_set_rows().iter().enumerate() {
        for sep in SEPARATIONS {
            let spec = GeneratorSpec {
                separation: sep,
                weight_exponent: if row.skewed_weights {
                    SKEWED_WEIGHT_EXPONENT
                } else {
                    0.0
                },
                eccentricity: row.eccentricity,
                size: row.size,
                ..base.clone()
            };
            out.push((format!("{}-{r}-sep{sep}", row.family), spec));
        }
    }
    out
}

/// `w_i = 2^(c_w·i) / Σ_j 2^(c_w·j)` for `i = 1..K`.
pub fn weight_schedule(k: usize, weight_exponent: f64) -> Vec<f64> {
    // shift exponents so the largest term is 1
    let top = if weight_exponent > 0.0 { k as f64 } else { 1.0 };
    let raw: Vec<f64> = (1..=k)
        .map(|i| (weight_exponent * (i as f64 - top)).exp2())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Covariance with smallest axis scale `lambda_min` and largest
/// `eccentricity · lambda_min`; the other `D − 2` scales are uniform in
/// between. Returns `Qᵀ diag(λ²) Q` for a random orthonormal `Q`.
pub fn random_covariance<R: Rng + ?Sized>(
    d: usize,
    lambda_min: f64,
    eccentricity: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if !(lambda_min > 0.0) || !(eccentricity >= 1.0) {
        return Err(Error::invalid(format!(
            "need lambda_min > 0 and eccentricity >= 1 (got {lambda_min}, {eccentricity})"
        )));
    }
    let e = if d == 1 { 1.0 } else { eccentricity };
    let lo = lambda_min;
    let hi = e * lambda_min;
    let mut scales = Vec::with_capacity(d);
    scales.push(lo);
    if d > 1 {
        scales.push(hi);
    }
    for _ in 2..d {
        scales.push(if hi > lo { rng.random_range(lo..=hi) } else { lo });
    }
    let squared: Vec<f64> = scales.iter().map(|s| s * s).collect();
    let q = random_orthonormal(d, rng, |r| r.random::<f64>());
    let mut cov = rotate_diagonal(&q, &squared);
    if e == 1.0 {
        // exactly spherical; avoid rounding noise from the rotation
        cov = DMatrix::identity(d, d) * squared[0];
    }
    Ok(cov)
}

/// `c_θ = min_{l≠k} ‖μ_l − μ_k‖ / sqrt(max(tr Σ_l, tr Σ_k))`.
pub fn separation(theta: &GmmParams) -> Result<f64> {
    if theta.k() < 2 {
        return Err(Error::invalid("separation needs at least two components"));
    }
    let comps = theta.components();
    let mut best = f64::INFINITY;
    for l in 0..comps.len() {
        for k in (l + 1)..comps.len() {
            let dist = (comps[l].mean() - comps[k].mean()).norm();
            let tr = comps[l].covariance().trace().max(comps[k].covariance().trace());
            best = best.min(dist / tr.sqrt());
        }
    }
    Ok(best)
}

fn sorted_eigenvalues(cov: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(cov.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Ratio of the largest to smallest axis scale (square roots of the
/// covariance eigenvalues).
pub fn eccentricity(cov: &DMatrix<f64>) -> f64 {
    eigenvalue_ratio(cov).sqrt()
}

/// Ratio of the largest to smallest covariance eigenvalue.
pub fn eigenvalue_ratio(cov: &DMatrix<f64>) -> f64 {
    let ev = sorted_eigenvalues(cov);
    ev[ev.len() - 1] / ev[0]
}

/// Draws a random mixture according to `spec`, with means rescaled so that
/// its separation equals `spec.separation`.
pub fn generate_gmm<R: Rng + ?Sized>(spec: &GeneratorSpec, rng: &mut R) -> Result<GmmParams> {
    spec.validate()?;
    let (k, d) = (spec.k, spec.d);
    let side = spec.side();

    let mut means: Vec<DVector<f64>> = Vec::with_capacity(k);
    while means.len() < k {
        let m = DVector::from_fn(d, |_, _| rng.random_range(0.0..side));
        if !means.contains(&m) {
            means.push(m);
        }
    }
    let weights = weight_schedule(k, spec.weight_exponent);
    let mut covs = Vec::with_capacity(k);
    for i in 0..k {
        let lambda_min = match spec.size {
            SizeMode::Constant => 1.0,
            SizeMode::Different => (i as f64).exp2(),
        };
        let e = match spec.eccentricity {
            EccentricityMode::Fixed(e) => e,
            EccentricityMode::Range(lo, hi) => {
                if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            }
        };
        covs.push(random_covariance(d, lambda_min, e, rng)?);
    }

    let unscaled = build(&weights, &means, &covs)?;
    let scale = if k >= 2 {
        spec.separation / separation(&unscaled)?
    } else {
        1.0
    };
    let scaled: Vec<DVector<f64>> = means.iter().map(|m| m * scale).collect();
    build(&weights, &scaled, &covs)
}

fn build(weights: &[f64], means: &[DVector<f64>], covs: &[DMatrix<f64>]) -> Result<GmmParams> {
    let comps = weights
        .iter()
        .zip(means)
        .zip(covs)
        .map(|((&w, m), c)| GaussianComponent::new(w, m.clone(), c.clone()))
        .collect::<Result<Vec<_>>>()?;
    GmmParams::normalized(comps)
}

/// Origin of a generated point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Component(usize),
    Noise,
}

impl Label {
    /// Component index, or `-1` for noise.
    pub fn as_i64(self) -> i64 {
        match self {
            Label::Component(k) => k as i64,
            Label::Noise => -1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub labels: Vec<Label>,
    pub truth: GmmParams,
}

/// Axis-aligned box `[lo, hi]` per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn of(rows: &[f64], d: usize) -> Self {
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in rows.chunks_exact(d) {
            for j in 0..d {
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        BoundingBox { lo, hi }
    }

    /// Scales every side by `factor` about the box centre.
    pub fn scaled(&self, factor: f64) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| {
                let c = 0.5 * (l + h);
                let half = 0.5 * (h - l) * factor;
                (c - half, c + half)
            })
            .unzip();
        BoundingBox { lo, hi }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }
}

/// Draws `spec.signal_points()` points from `theta` and fills the rest of
/// `spec.n_points` with uniform noise from the 1.2× bounding box of the
/// signal.
pub fn sample_dataset<R: Rng + ?Sized>(
    theta: &GmmParams,
    spec: &GeneratorSpec,
    rng: &mut R,
) -> Result<LabeledDataset> {
    spec.validate()?;
    let d = theta.dim();
    let n_signal = spec.signal_points();
    let n_noise = spec.n_points - n_signal;
    let weights = theta.weights();

    let mut values = Vec::with_capacity(spec.n_points * d);
    let mut labels = Vec::with_capacity(spec.n_points);
    let mut z = vec![0.0; d];
    for _ in 0..n_signal {
        let k = crate::init::draw_weighted(&weights, rng).expect("weights sum to one");
        let comp = &theta.components()[k];
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let l = comp.chol();
        for i in 0..d {
            let mut x = comp.mean()[i];
            for j in 0..=i {
                x += l[(i, j)] * z[j];
            }
            values.push(x);
        }
        labels.push(Label::Component(k));
    }

    if n_noise > 0 {
        let bbox = if n_signal > 0 {
            BoundingBox::of(&values, d)
        } else {
            let means: Vec<f64> = theta.means().iter().flat_map(|m| m.iter().copied().collect::<Vec<_>>()).collect();
            BoundingBox::of(&means, d)
        }
        .scaled(NOISE_BOX_FACTOR);
        for _ in 0..n_noise {
            for j in 0..d {
                let (lo, hi) = (bbox.lo[j], bbox.hi[j]);
                values.push(if hi > lo { rng.random_range(lo..=hi) } else { lo });
            }
            labels.push(Label::Noise);
        }
    }

    Ok(LabeledDataset {
        data: DataMatrix::from_row_major(d, values)?,
        labels,
        truth: theta.clone(),
    })
}

/// Mixture and data set for `spec`, seeded from `spec.seed`.
pub fn generate(spec: &GeneratorSpec) -> Result<LabeledDataset> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let theta = generate_gmm(spec, &mut rng)?;
    sample_dataset(&theta, spec, &mut rng)
}
