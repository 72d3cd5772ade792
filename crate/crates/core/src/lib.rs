//! Copula directional dependence between two variables.
//!
//! Paired measurements are rank-transformed onto the unit square, a beta
//! regression is fitted in each direction, and the strength of each
//! directional dependence is `12 * Var` of the fitted conditional means.
//! The direction of influence is decided either from a percentile-bootstrap
//! interval of the difference ([`frequentist`]) or from the posterior
//! probability that one direction dominates ([`bayesian`]).

pub mod bayesian;
pub mod betareg;
pub mod error;
pub mod frequentist;
pub mod mcmc;
pub mod optim;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod sample;
pub mod stats;

pub use betareg::{BetaRegCoefficients, Direction, KappaSpec};
pub use error::{CddError, Result};
pub use sample::{to_pseudo_observations, PairedSample, PseudoSample};
