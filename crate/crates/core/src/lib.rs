//! Estimating a study's mean and standard deviation from its reported
//! median, range, quartiles and sample size.
//!
//! The divisor functions used for the standard deviation carry additive
//! small-sample corrections for `2 <= n <= 50`; [`refit`] re-derives their
//! coefficients from the tabulated divisors and [`oracle`] recomputes those
//! tables numerically.

pub mod error;
pub mod estimators;
pub mod oracle;
pub mod quadrature;
pub mod refit;
pub mod specfun;
pub mod tables;

pub use error::{Error, Result};
pub use estimators::{
    estimate_mean, estimate_sd, eta_hat, required_sample_size, xi_hat, CorrectionOrder, Estimator,
    EstimatorConfig, MomentEstimate, Scenario, StudySummary,
};
pub use tables::{eta_table, xi_table, DivisorKind, DivisorTable};
