//! Beta regression in mean/precision form with a logit mean link.
//!
//! The conditional law of the response given the covariate is
//! `Beta(mu * kappa, (1 - mu) * kappa)` with `mu = logistic(beta0 + beta1 * x)`.
//! The precision is either tied to the same linear predictor,
//! `kappa = 1 + exp(beta0 + beta1 * x)`, or a free positive constant.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{CddError, Result};
use crate::sample::PseudoSample;

/// Ceiling applied to the link-derived precision.
pub const KAPPA_CEILING: f64 = 1e8;

/// Which variable is the covariate in a conditional model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// `V | U`: `u` is the covariate, `v` the response.
    UToV,
    /// `U | V`: `v` is the covariate, `u` the response.
    VToU,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::UToV, Direction::VToU];

    pub fn reversed(self) -> Self {
        match self {
            Direction::UToV => Direction::VToU,
            Direction::VToU => Direction::UToV,
        }
    }

    /// `(covariate, response)` columns of a pseudo-sample for this direction.
    pub fn columns(self, ps: &PseudoSample) -> (&[f64], &[f64]) {
        match self {
            Direction::UToV => (ps.u(), ps.v()),
            Direction::VToU => (ps.v(), ps.u()),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::UToV => "U->V",
            Direction::VToU => "V->U",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KappaSpec {
    LinkDerived,
    Free(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRegCoefficients {
    pub beta0: f64,
    pub beta1: f64,
    pub kappa: KappaSpec,
}

impl BetaRegCoefficients {
    pub fn link_derived(beta0: f64, beta1: f64) -> Self {
        Self {
            beta0,
            beta1,
            kappa: KappaSpec::LinkDerived,
        }
    }

    pub fn free(beta0: f64, beta1: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(CddError::Domain {
                what: "kappa",
                value: kappa,
            });
        }
        Ok(Self {
            beta0,
            beta1,
            kappa: KappaSpec::Free(kappa),
        })
    }

    pub fn linear_predictor(&self, covariate: f64) -> f64 {
        self.beta0 + self.beta1 * covariate
    }

    /// Shape pair `(a, b)` and `d a / d eta`, `d b / d eta` at one covariate.
    fn shapes(&self, covariate: f64) -> ([f64; 2], [f64; 2]) {
        let eta = self.linear_predictor(covariate);
        let mu = logistic(eta);
        let one_minus_mu = logistic(-eta);
        let (kappa, dkappa) = match self.kappa {
            KappaSpec::Free(k) => (k, 0.0),
            KappaSpec::LinkDerived => {
                let k = 1.0 + eta.exp();
                if k >= KAPPA_CEILING {
                    (KAPPA_CEILING, 0.0)
                } else {
                    (k, k - 1.0)
                }
            }
        };
        let dmu = mu * one_minus_mu;
        (
            [mu * kappa, one_minus_mu * kappa],
            [dmu * kappa + mu * dkappa, -dmu * kappa + one_minus_mu * dkappa],
        )
    }
}

/// Logistic function, stable for large `|x|`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Conditional mean `logistic(beta0 + beta1 * covariate)`.
pub fn inv_logit_mean(coef: &BetaRegCoefficients, covariate: f64) -> f64 {
    logistic(coef.linear_predictor(covariate))
}

/// Precision tied to the mean predictor: `1 + exp(beta0 + beta1 * covariate)`,
/// capped at [`KAPPA_CEILING`].
pub fn link_precision(coef: &BetaRegCoefficients, covariate: f64) -> Result<f64> {
    match coef.kappa {
        KappaSpec::Free(k) => Err(CddError::InvalidConfig(format!(
            "link precision requested for a free-precision model (kappa = {k})"
        ))),
        KappaSpec::LinkDerived => Ok((1.0 + coef.linear_predictor(covariate).exp()).min(KAPPA_CEILING)),
    }
}

fn log_density_shapes(y: f64, a: f64, b: f64) -> f64 {
    ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + (a - 1.0) * y.ln() + (b - 1.0) * (-y).ln_1p()
}

/// Log density of `Beta(mu * kappa, (1 - mu) * kappa)` at `y`.
pub fn beta_log_density(y: f64, mu: f64, kappa: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(CddError::Domain { what: "y", value: y });
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(CddError::Domain { what: "mu", value: mu });
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(CddError::Domain {
            what: "kappa",
            value: kappa,
        });
    }
    Ok(log_density_shapes(y, mu * kappa, (1.0 - mu) * kappa))
}

fn check_shapes(a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(CddError::Domain {
            what: "shape a",
            value: a,
        });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(CddError::Domain {
            what: "shape b",
            value: b,
        });
    }
    Ok(())
}

/// Log-likelihood of one conditional model over the whole pseudo-sample.
pub fn direction_log_likelihood(ps: &PseudoSample, dir: Direction, coef: &BetaRegCoefficients) -> Result<f64> {
    let (cov, resp) = dir.columns(ps);
    let mut total = 0.0;
    for (&x, &y) in cov.iter().zip(resp) {
        let ([a, b], _) = coef.shapes(x);
        check_shapes(a, b)?;
        total += log_density_shapes(y, a, b);
    }
    Ok(total)
}

/// Log-likelihood and its gradient with respect to `(beta0, beta1)`.
///
/// For a free precision the gradient holds `kappa` fixed.
pub fn direction_log_likelihood_grad(
    ps: &PseudoSample,
    dir: Direction,
    coef: &BetaRegCoefficients,
) -> Result<(f64, [f64; 2])> {
    let (cov, resp) = dir.columns(ps);
    let mut total = 0.0;
    let mut grad = [0.0; 2];
    for (&x, &y) in cov.iter().zip(resp) {
        let ([a, b], [da, db]) = coef.shapes(x);
        check_shapes(a, b)?;
        total += log_density_shapes(y, a, b);
        let psi_ab = digamma(a + b);
        let dl_deta = (psi_ab - digamma(a) + y.ln()) * da + (psi_ab - digamma(b) + (-y).ln_1p()) * db;
        grad[0] += dl_deta;
        grad[1] += dl_deta * x;
    }
    Ok((total, grad))
}

/// Fitted conditional means at the observed covariates of `dir`.
pub fn fitted_means(ps: &PseudoSample, dir: Direction, coef: &BetaRegCoefficients) -> Vec<f64> {
    let (cov, _) = dir.columns(ps);
    cov.iter().map(|&x| inv_logit_mean(coef, x)).collect()
}

/// Directional dependence `12 * Var(means)` with the population variance.
pub fn rho_squared_from_means(means: &[f64]) -> f64 {
    if means.is_empty() {
        return 0.0;
    }
    let n = means.len() as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n;
    12.0 * var
}
