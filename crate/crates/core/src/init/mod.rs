//! Initialization strategies for EM on Gaussian mixtures.
//!
//! Three hard-clustering mean selectors ([`uniform_means`],
//! [`kmeanspp_means`], [`gonzalez_means`]) are completed into mixtures by
//! [`means2gmm`]. [`adaptive_init`], [`gonzalez_for_gmm`] and
//! [`kwedlos_gonzalez`] work on the mixture directly through the minimum
//! Mahalanobis distance `m₁`. [`hac_init`] is the agglomerative baseline.

mod adaptive;
mod gonzalez;
mod hac;
mod means;
mod means2gmm;
mod rand_covar;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core_math::{DataMatrix, GmmParams};
use crate::error::{Error, Result};

pub use adaptive::{adaptive_init, sample_density, SampleDensity};
pub use gonzalez::{gonzalez_for_gmm, kwedlos_gonzalez, sample_size, subsample_indices, SELECT_MIN};
pub use hac::{average_linkage, hac_init, LinkageMatrix};
pub use means::{
    gonzalez_from, gonzalez_indices, gonzalez_means, kmeanspp_from, kmeanspp_indices,
    kmeanspp_means, uniform_indices, uniform_means,
};
pub use means2gmm::{means2gmm, nearest_mean_partition};
pub use rand_covar::{rand_covar, RandCovar, RandomCovariance, DEGENERATE_SCALE};

/// Draws an index with probability proportional to `weights`. Returns
/// `None` when the total mass is zero or not finite.
pub(crate) fn draw_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = Some(i);
            if u < acc {
                return Some(i);
            }
        }
    }
    // rounding can leave u just above the accumulated total
    last_positive
}

/// The family of an initialization method, without hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    Uniform,
    KmeansPP,
    Adaptive,
    Agglomerative,
    Gonzalez,
    GonzalezForGmm,
    KwedlosGonzalez,
}

impl MethodKind {
    pub const ALL: [MethodKind; 7] = [
        MethodKind::Uniform,
        MethodKind::KmeansPP,
        MethodKind::Adaptive,
        MethodKind::Agglomerative,
        MethodKind::Gonzalez,
        MethodKind::GonzalezForGmm,
        MethodKind::KwedlosGonzalez,
    ];

    /// Identifier used in CSV files and on the command line.
    pub fn id(self) -> &'static str {
        match self {
            MethodKind::Uniform => "uniform",
            MethodKind::KmeansPP => "kmeans++",
            MethodKind::Adaptive => "adaptive",
            MethodKind::Agglomerative => "agglomerative",
            MethodKind::Gonzalez => "gonzalez",
            MethodKind::GonzalezForGmm => "gonzalez-for-gmm",
            MethodKind::KwedlosGonzalez => "kwedlos-gonzalez",
        }
    }

    pub fn from_id(id: &str) -> Option<MethodKind> {
        let norm = id.trim().to_ascii_lowercase().replace('_', "-");
        match norm.as_str() {
            "kmeanspp" | "kmeans-pp" => return Some(MethodKind::KmeansPP),
            "hac" => return Some(MethodKind::Agglomerative),
            "gonzalezforgmm" => return Some(MethodKind::GonzalezForGmm),
            "kwedlosgonzalez" => return Some(MethodKind::KwedlosGonzalez),
            _ => {}
        }
        MethodKind::ALL.into_iter().find(|k| k.id() == norm)
    }
}

/// An initialization method together with its hyperparameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MethodSpec {
    Uniform,
    KmeansPP,
    Gonzalez,
    Adaptive { alpha: f64 },
    GonzalezForGmm { sample_fraction: f64 },
    KwedlosGonzalez { sample_fraction: f64 },
    Agglomerative { sample_fraction: f64 },
}

impl MethodSpec {
    /// The eight configurations compared in the benchmark tables:
    /// `α ∈ {1, 0.5}` and `s = 0.1`.
    pub fn roster() -> Vec<MethodSpec> {
        vec![
            MethodSpec::Uniform,
            MethodSpec::KmeansPP,
            MethodSpec::Adaptive { alpha: 1.0 },
            MethodSpec::Adaptive { alpha: 0.5 },
            MethodSpec::Agglomerative { sample_fraction: 0.1 },
            MethodSpec::Gonzalez,
            MethodSpec::GonzalezForGmm { sample_fraction: 0.1 },
            MethodSpec::KwedlosGonzalez { sample_fraction: 0.1 },
        ]
    }

    pub fn kind(&self) -> MethodKind {
        match self {
            MethodSpec::Uniform => MethodKind::Uniform,
            MethodSpec::KmeansPP => MethodKind::KmeansPP,
            MethodSpec::Gonzalez => MethodKind::Gonzalez,
            MethodSpec::Adaptive { .. } => MethodKind::Adaptive,
            MethodSpec::GonzalezForGmm { .. } => MethodKind::GonzalezForGmm,
            MethodSpec::KwedlosGonzalez { .. } => MethodKind::KwedlosGonzalez,
            MethodSpec::Agglomerative { .. } => MethodKind::Agglomerative,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            MethodSpec::Adaptive { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn sample_fraction(&self) -> Option<f64> {
        match *self {
            MethodSpec::GonzalezForGmm { sample_fraction }
            | MethodSpec::KwedlosGonzalez { sample_fraction }
            | MethodSpec::Agglomerative { sample_fraction } => Some(sample_fraction),
            _ => None,
        }
    }

    /// Rebuilds a spec from its kind and optional hyperparameters,
    /// enforcing that exactly the right one is present.
    pub fn from_parts(kind: MethodKind, alpha: Option<f64>, s: Option<f64>) -> Result<MethodSpec> {
        let spec = match (kind, alpha, s) {
            (MethodKind::Uniform, None, None) => MethodSpec::Uniform,
            (MethodKind::KmeansPP, None, None) => MethodSpec::KmeansPP,
            (MethodKind::Gonzalez, None, None) => MethodSpec::Gonzalez,
            (MethodKind::Adaptive, Some(alpha), None) => MethodSpec::Adaptive { alpha },
            (MethodKind::GonzalezForGmm, None, Some(sample_fraction)) => {
                MethodSpec::GonzalezForGmm { sample_fraction }
            }
            (MethodKind::KwedlosGonzalez, None, Some(sample_fraction)) => {
                MethodSpec::KwedlosGonzalez { sample_fraction }
            }
            (MethodKind::Agglomerative, None, Some(sample_fraction)) => {
                MethodSpec::Agglomerative { sample_fraction }
            }
            (kind, alpha, s) => {
                return Err(Error::invalid(format!(
                    "method {} does not take alpha={alpha:?}, s={s:?}",
                    kind.id()
                )))
            }
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(alpha) = self.alpha() {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::invalid(format!("alpha = {alpha} outside [0, 1]")));
            }
        }
        if let Some(s) = self.sample_fraction() {
            sample_size(1, s)?;
        }
        Ok(())
    }

    /// Human-readable label, e.g. `Adaptive(0.5)`.
    pub fn label(&self) -> String {
        match *self {
            MethodSpec::Uniform => "Uniform".into(),
            MethodSpec::KmeansPP => "Kmeans++".into(),
            MethodSpec::Gonzalez => "Gonzalez".into(),
            MethodSpec::Adaptive { alpha } => format!("Adaptive({alpha})"),
            MethodSpec::GonzalezForGmm { sample_fraction } => {
                format!("GonzalezForGMM({sample_fraction})")
            }
            MethodSpec::KwedlosGonzalez { sample_fraction } => {
                format!("KwedlosGonzalez({sample_fraction})")
            }
            MethodSpec::Agglomerative { sample_fraction } => {
                format!("Agglomerative({sample_fraction})")
            }
        }
    }

    /// Canonical ordering: by kind, then descending hyperparameter.
    pub fn canonical_cmp(&self, other: &MethodSpec) -> std::cmp::Ordering {
        let param = |m: &MethodSpec| m.alpha().or(m.sample_fraction()).unwrap_or(0.0);
        self.kind()
            .cmp(&other.kind())
            .then_with(|| param(other).total_cmp(&param(self)))
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    /// Accepts `kind`, `kind:param` or `Kind(param)`, e.g. `kmeans++`,
    /// `adaptive:0.5`, `Agglomerative(0.1)`.
    fn from_str(s: &str) -> Result<MethodSpec> {
        let s = s.trim();
        let (name, param) = if let Some((n, p)) = s.split_once(':') {
            (n, Some(p))
        } else if let (Some(open), true) = (s.find('('), s.ends_with(')')) {
            (&s[..open], Some(&s[open + 1..s.len() - 1]))
        } else {
            (s, None)
        };
        let kind = MethodKind::from_id(name)
            .ok_or_else(|| Error::invalid(format!("unknown method '{name}'")))?;
        let value = param
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad parameter '{p}' for {name}")))
            })
            .transpose()?;
        match kind {
            MethodKind::Adaptive => MethodSpec::from_parts(kind, Some(value.unwrap_or(1.0)), None),
            MethodKind::GonzalezForGmm | MethodKind::KwedlosGonzalez | MethodKind::Agglomerative => {
                MethodSpec::from_parts(kind, None, Some(value.unwrap_or(0.1)))
            }
            _ => MethodSpec::from_parts(kind, None, value),
        }
    }
}

/// Runs the initializer described by `spec`.
pub fn run_method<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    spec: &MethodSpec,
    rng: &mut R,
) -> Result<GmmParams> {
    spec.validate()?;
    match *spec {
        MethodSpec::Uniform => means2gmm(data, &uniform_means(data, k, rng)?),
        MethodSpec::KmeansPP => means2gmm(data, &kmeanspp_means(data, k, rng)?),
        MethodSpec::Gonzalez => means2gmm(data, &gonzalez_means(data, k, rng)?),
        MethodSpec::Adaptive { alpha } => adaptive_init(data, k, alpha, rng),
        MethodSpec::GonzalezForGmm { sample_fraction } => {
            gonzalez_for_gmm(data, k, sample_fraction, rng)
        }
        MethodSpec::KwedlosGonzalez { sample_fraction } => {
            kwedlos_gonzalez(data, k, sample_fraction, rng)
        }
        MethodSpec::Agglomerative { sample_fraction } => hac_init(data, k, sample_fraction, rng),
    }
}
