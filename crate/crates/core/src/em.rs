//! EM for Gaussian mixtures with a fixed number of rounds.
//!
//! Degenerate components are repaired rather than reported as errors:
//!
//! - a component whose expected point count `N_k` falls below
//!   `min_effective_count` is resampled (mean drawn uniformly from the data,
//!   covariance from [`RandomCovariance`]);
//! - a covariance that is not positive definite is blended with the previous
//!   one, `(1 - β) Σ_new + β Σ_old` for β in [`MIX_SCHEDULE`];
//! - if no blend is positive definite the previous covariance is kept.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::core_math::{
    log_likelihood_unchecked, DataMatrix, GaussianComponent, GmmParams, MixtureEvaluator,
};
use crate::error::{Error, Result};
use crate::init::RandomCovariance;
use crate::linalg::cholesky_unchecked;

pub const DEFAULT_ROUNDS: usize = 50;

/// Blend factors tried, in order, for a covariance that is not positive
/// definite.
pub const MIX_SCHEDULE: [f64; 3] = [0.5, 0.75, 0.9];

#[derive(Clone, Debug, PartialEq)]
pub struct EmConfig {
    pub rounds: usize,
    /// Smallest admissible `N_k`; `None` means `D + 1`.
    pub min_effective_count: Option<f64>,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            rounds: DEFAULT_ROUNDS,
            min_effective_count: None,
        }
    }
}

impl EmConfig {
    pub fn with_rounds(rounds: usize) -> Result<Self> {
        let cfg = EmConfig {
            rounds,
            ..EmConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::invalid("EM needs at least one round"));
        }
        if let Some(m) = self.min_effective_count {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::invalid(format!("min_effective_count = {m} must be positive")));
            }
        }
        Ok(())
    }

    pub fn min_count(&self, d: usize) -> f64 {
        self.min_effective_count.unwrap_or((d + 1) as f64)
    }
}

/// What happened during one EM step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    /// `L(X, θ)` of the model the step started from.
    pub log_likelihood: f64,
    pub resamples: usize,
    pub mixes: usize,
    pub keeps: usize,
}

impl StepReport {
    pub fn degeneracy_events(&self) -> usize {
        self.resamples + self.mixes + self.keeps
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmTrace {
    /// `L(X, θ₀)` of the starting model.
    pub initial_log_likelihood: f64,
    /// `L(X, θ_i)` after each round.
    pub log_likelihood: Vec<f64>,
    pub resample_events: usize,
    pub covariance_mix_events: usize,
    pub covariance_keep_events: usize,
}

impl EmTrace {
    pub fn degeneracy_events(&self) -> usize {
        self.resample_events + self.covariance_mix_events + self.covariance_keep_events
    }

    pub fn final_log_likelihood(&self) -> f64 {
        *self
            .log_likelihood
            .last()
            .unwrap_or(&self.initial_log_likelihood)
    }
}

/// Responsibilities `r_nk` (row-major `N × K`) and `L(X, θ)`.
pub fn responsibilities(data: &DataMatrix, theta: &GmmParams) -> Result<(Vec<f64>, f64)> {
    if data.d() != theta.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            found: data.d(),
        });
    }
    Ok(e_step(data, theta))
}

fn e_step(data: &DataMatrix, theta: &GmmParams) -> (Vec<f64>, f64) {
    let k = theta.k();
    let mut eval = MixtureEvaluator::new(theta);
    let mut resp = vec![0.0; data.n() * k];
    let mut ll = 0.0;
    for (x, r) in data.rows().zip(resp.chunks_exact_mut(k)) {
        let lse = eval.joint_log(x, r);
        ll += lse;
        for v in r.iter_mut() {
            *v = (*v - lse).exp();
        }
    }
    (resp, ll)
}

/// One E-step followed by one M-step with degeneracy handling.
pub fn em_step<R: Rng + ?Sized>(
    data: &DataMatrix,
    theta: &GmmParams,
    cfg: &EmConfig,
    rng: &mut R,
) -> Result<(GmmParams, StepReport)> {
    cfg.validate()?;
    if data.d() != theta.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta.dim(),
            found: data.d(),
        });
    }
    let mut covar = None;
    Ok(step(data, theta, cfg, rng, &mut covar))
}

fn step<R: Rng + ?Sized>(
    data: &DataMatrix,
    theta: &GmmParams,
    cfg: &EmConfig,
    rng: &mut R,
    covar: &mut Option<RandomCovariance>,
) -> (GmmParams, StepReport) {
    let (n, d, k) = (data.n(), data.d(), theta.k());
    let (resp, ll) = e_step(data, theta);
    let min_count = cfg.min_count(d);
    let mut report = StepReport {
        log_likelihood: ll,
        ..StepReport::default()
    };

    let mut next = Vec::with_capacity(k);
    for (j, old) in theta.components().iter().enumerate() {
        let nk: f64 = (0..n).map(|i| resp[i * k + j]).sum();
        if !(nk >= min_count) {
            report.resamples += 1;
            let covar = covar.get_or_insert_with(|| RandomCovariance::new(data, k));
            let mean = DVector::from_column_slice(data.row(rng.random_range(0..n)));
            let cov = covar.draw(rng).covariance;
            let chol = cholesky_unchecked(&cov).unwrap_or_else(|| DMatrix::identity(d, d));
            next.push(GaussianComponent::from_parts(min_count / n as f64, mean, cov, chol));
            continue;
        }

        let mut mean = DVector::<f64>::zeros(d);
        for (i, x) in data.rows().enumerate() {
            let r = resp[i * k + j];
            for (m, v) in mean.iter_mut().zip(x) {
                *m += r * v;
            }
        }
        mean /= nk;

        let mut cov = DMatrix::<f64>::zeros(d, d);
        let mut diff = vec![0.0; d];
        for (i, x) in data.rows().enumerate() {
            let r = resp[i * k + j];
            for (t, v) in diff.iter_mut().enumerate() {
                *v = x[t] - mean[t];
            }
            for a in 0..d {
                let ra = r * diff[a];
                for b in 0..=a {
                    cov[(a, b)] += ra * diff[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..=a {
                let v = cov[(a, b)] / nk;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }

        let weight = nk / n as f64;
        if let Some(chol) = cholesky_unchecked(&cov) {
            next.push(GaussianComponent::from_parts(weight, mean, cov, chol));
            continue;
        }
        let blended = MIX_SCHEDULE.iter().find_map(|&beta| {
            let mixed = &cov * (1.0 - beta) + old.covariance() * beta;
            cholesky_unchecked(&mixed).map(|chol| (mixed, chol))
        });
        match blended {
            Some((mixed, chol)) => {
                report.mixes += 1;
                next.push(GaussianComponent::from_parts(weight, mean, mixed, chol));
            }
            None => {
                report.keeps += 1;
                next.push(GaussianComponent::from_parts(
                    weight,
                    mean,
                    old.covariance().clone(),
                    old.chol().clone(),
                ));
            }
        }
    }
    let theta = GmmParams::normalized(next).expect("M-step keeps a valid mixture");
    (theta, report)
}

/// Runs `cfg.rounds` EM steps from `theta0`.
pub fn em_run<R: Rng + ?Sized>(
    data: &DataMatrix,
    theta0: &GmmParams,
    cfg: &EmConfig,
    rng: &mut R,
) -> Result<(GmmParams, EmTrace)> {
    cfg.validate()?;
    if data.d() != theta0.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta0.dim(),
            found: data.d(),
        });
    }
    let mut covar = None;
    let mut trace = EmTrace {
        log_likelihood: Vec::with_capacity(cfg.rounds),
        ..EmTrace::default()
    };
    let mut theta = theta0.clone();
    for round in 0..cfg.rounds {
        let (next, report) = step(data, &theta, cfg, rng, &mut covar);
        if round == 0 {
            trace.initial_log_likelihood = report.log_likelihood;
        } else {
            trace.log_likelihood.push(report.log_likelihood);
        }
        trace.resample_events += report.resamples;
        trace.covariance_mix_events += report.mixes;
        trace.covariance_keep_events += report.keeps;
        theta = next;
    }
    trace.log_likelihood.push(log_likelihood_unchecked(data, &theta));
    Ok((theta, trace))
}
