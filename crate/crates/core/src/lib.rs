//! Initialization strategies for the EM algorithm on Gaussian mixture
//! models, together with a mixture data generator and a benchmark harness
//! that ranks initializers by the likelihood they reach.
//!
//! The crate is organised by stage:
//!
//! - [`core_math`]: Gaussian densities, mixture log-likelihood, 1-MLE.
//! - [`init`]: mean selectors, Means2GMM and the mixture-aware samplers.
//! - [`em`]: fixed-round EM with randomized degeneracy handling.
//! - [`datagen`]: random mixtures with controlled separation and shape.
//! - [`bench`]: seed grids, NLL statistics and rank tables.
//! - [`cli`]: the `gmm-init` command line.

// NaN must fail validation checks, so `!(x > 0.0)` is intended
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod core_math;
pub mod datagen;
pub mod em;
pub mod error;
pub mod init;
pub mod io;
pub mod linalg;

pub use core_math::{DataMatrix, GaussianComponent, GmmParams};
pub use error::{Error, Result};
pub use init::MethodSpec;
