//! Confidence distributions, Bayes posteriors, and frequentist coverage
//! audits for scalar continuous models.
//!
//! The crate is organized in layers:
//!
//! - [`specfun`] and [`num`]: the numerical kernels (special functions,
//!   adaptive quadrature, differentiation, root finding).
//! - [`models`]: scalar models with exact CDF/quantile evaluations — location
//!   families, a mean bounded below, a noncentral radius, and a normal family
//!   whose variance bends with the mean.
//! - [`confidence`] / [`bayes`]: the two inversion routes from one observed
//!   data point to a distribution over the parameter, plus default priors
//!   that reconcile them.
//! - [`coverage`]: frequentist audits — for a quantile-style rule, how often
//!   does the asserted parameter bound actually hold under repeated sampling?
//! - [`asymptotic`]: closed-form O(1/n) expansions of the same quantities,
//!   with exact counterparts for gap verification.
//!
//! Heavy grid sweeps run data-parallel via `rayon` by default; build with
//! `--no-default-features` for the strictly sequential fallback.

pub mod asymptotic;
pub mod bayes;
pub mod confidence;
pub mod coverage;
pub mod error;
pub mod models;
pub mod num;
pub mod report;
pub mod specfun;

pub use error::{Error, Result};
