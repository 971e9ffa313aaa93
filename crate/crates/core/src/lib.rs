//! Hellinger correlation between two continuous random variables.
//!
//! The dependence measure `η ∈ [0, 1]` is the squared Hellinger distance
//! between the copula of `(X₁, X₂)` and the independence copula, rescaled so
//! that `η = |ρ|` for bivariate normal vectors. It is 0 exactly under
//! independence and 1 when both variables are driven by a single latent
//! variable along a curve.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`ranks_nn`] | pseudo-observations, exact nearest-neighbour distances |
//! | [`basis`] | orthonormal shifted Legendre polynomials |
//! | [`transform`] | Beta(6,6) marginal transform and weights |
//! | [`estimator`] | affinity, coefficient table, shrinkage, `η̂`, full pipeline |
//! | [`cv`] | leave-one-out choice of the expansion cutoffs |
//! | [`inference`] | Monte-Carlo null tables, p-values, beta-copula bootstrap |
//! | [`generators`] | seeded simulation designs |
//!
//! ```
//! use hellcor::{estimate, BivariateSample, EstimatorConfig};
//!
//! let rows: Vec<[f64; 2]> = (0..50).map(|i| {
//!     let x = i as f64 / 50.0;
//!     [x, (6.0 * x).sin()]
//! }).collect();
//! let sample = BivariateSample::new(rows).unwrap();
//! let result = estimate(&sample, &EstimatorConfig::default()).unwrap();
//! assert!(result.eta > 0.5);
//! ```

pub mod basis;
pub mod cv;
pub mod datasets;
pub mod error;
pub mod estimator;
pub mod generators;
pub mod inference;
pub mod ranks_nn;
pub mod rng;
pub mod transform;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use estimator::{
    estimate, eta_from_b, gaussian_b, gaussian_h2, pearson, Cutoffs, EstimateResult,
    EstimatorConfig, TransformKind,
};
pub use ranks_nn::{BivariateSample, PseudoObs, TiePolicy};
