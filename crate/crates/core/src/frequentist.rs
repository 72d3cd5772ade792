//! Maximum-likelihood directional dependence with percentile-bootstrap intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::betareg::{
    direction_log_likelihood_grad, fitted_means, rho_squared_from_means, BetaRegCoefficients, Direction,
};
use crate::error::{CddError, Result};
use crate::optim::{maximize_bfgs, MaximizeOptions};
use crate::sample::{to_pseudo_observations, PairedSample, PseudoSample};
use crate::stats::equal_tailed;

pub const DEFAULT_BOOTSTRAP: usize = 1000;
pub const MIN_BOOTSTRAP: usize = 200;
pub const DEFAULT_LEVEL: f64 = 0.95;
/// Largest tolerated fraction of failed bootstrap replicates.
pub const MAX_FAILED_FRACTION: f64 = 0.10;

const RESTARTS: [[f64; 2]; 3] = [[0.5, 0.5], [-0.5, 1.0], [1.0, -1.0]];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Outcome of a direction decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    UToV,
    VToU,
    Inconclusive,
}

impl From<Direction> for Decision {
    fn from(d: Direction) -> Self {
        match d {
            Direction::UToV => Decision::UToV,
            Direction::VToU => Decision::VToU,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleFit {
    pub coef: BetaRegCoefficients,
    pub log_likelihood: f64,
    /// Index of the start that converged (0 is the independence start).
    pub start_index: usize,
}

/// Maximizes the link-derived-precision likelihood of one direction.
///
/// Starts at `(0, 0)` and retries from up to three perturbed starts.
pub fn fit_direction_mle(ps: &PseudoSample, dir: Direction) -> Result<MleFit> {
    let objective = |p: [f64; 2]| {
        direction_log_likelihood_grad(ps, dir, &BetaRegCoefficients::link_derived(p[0], p[1]))
            .ok()
            .filter(|(v, g)| v.is_finite() && g.iter().all(|x| x.is_finite()))
    };
    let opts = MaximizeOptions {
        max_iter: 500,
        grad_tol: 1e-8 * ps.len() as f64,
    };
    let baseline = objective([0.0, 0.0]).map(|(v, _)| v);
    let starts = std::iter::once([0.0, 0.0]).chain(RESTARTS);
    for (start_index, start) in starts.enumerate() {
        let Some(opt) = maximize_bfgs(objective, start, opts) else {
            continue;
        };
        if opt.converged && baseline.is_none_or(|b| opt.value >= b) {
            return Ok(MleFit {
                coef: BetaRegCoefficients::link_derived(opt.point[0], opt.point[1]),
                log_likelihood: opt.value,
                start_index,
            });
        }
    }
    Err(CddError::NonConvergence {
        attempts: 1 + RESTARTS.len(),
    })
}

/// Point estimates for both directions on one pseudo-sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimates {
    pub uv: MleFit,
    pub vu: MleFit,
    pub rho2_uv: f64,
    pub rho2_vu: f64,
}

impl PointEstimates {
    pub fn delta(&self) -> f64 {
        self.rho2_uv - self.rho2_vu
    }
}

pub fn point_estimates(ps: &PseudoSample) -> Result<PointEstimates> {
    let uv = fit_direction_mle(ps, Direction::UToV)?;
    let vu = fit_direction_mle(ps, Direction::VToU)?;
    Ok(PointEstimates {
        rho2_uv: rho_squared_from_means(&fitted_means(ps, Direction::UToV, &uv.coef)),
        rho2_vu: rho_squared_from_means(&fitted_means(ps, Direction::VToU, &vu.coef)),
        uv,
        vu,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequentistFit {
    /// Model of `V | U`.
    pub coef_uv: BetaRegCoefficients,
    /// Model of `U | V`.
    pub coef_vu: BetaRegCoefficients,
    pub rho2_uv: f64,
    pub rho2_vu: f64,
    pub delta_rho2: f64,
    pub ci_delta: Interval,
    pub n_boot: usize,
    pub n_boot_failed: usize,
    pub converged: [bool; 2],
}

/// Bootstrap resample indices for replicate `index`; a pure function of
/// `(seed, index, n)`.
fn resample_indices(seed: u64, index: usize, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Both directional measures with a percentile-bootstrap interval for their
/// difference.
///
/// Every replicate resamples the raw pairs and repeats the rank transform.
/// Replicates run in parallel and are reduced in index order, so the result
/// depends only on the data, `n_boot`, `level`, and `seed`.
pub fn estimate_frequentist(sample: &PairedSample, n_boot: usize, level: f64, seed: u64) -> Result<FrequentistFit> {
    if n_boot < MIN_BOOTSTRAP {
        return Err(CddError::InvalidConfig(format!(
            "need at least {MIN_BOOTSTRAP} bootstrap replicates, got {n_boot}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(CddError::InvalidConfig(format!("level {level} not in (0, 1)")));
    }
    let ps = to_pseudo_observations(sample)?;
    let point = point_estimates(&ps)?;

    let n = sample.len();
    let deltas: Vec<Option<f64>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let resampled = sample.select(&resample_indices(seed, b, n));
            let ps = to_pseudo_observations(&resampled).ok()?;
            point_estimates(&ps).ok().map(|p| p.delta())
        })
        .collect();
    let ok: Vec<f64> = deltas.iter().flatten().copied().collect();
    let failed = n_boot - ok.len();
    if failed as f64 > MAX_FAILED_FRACTION * n_boot as f64 {
        return Err(CddError::BootstrapFailures { failed, total: n_boot });
    }
    let (lower, upper) = equal_tailed(&ok, level);

    Ok(FrequentistFit {
        coef_uv: point.uv.coef,
        coef_vu: point.vu.coef,
        rho2_uv: point.rho2_uv,
        rho2_vu: point.rho2_vu,
        delta_rho2: point.delta(),
        ci_delta: Interval { lower, upper, level },
        n_boot,
        n_boot_failed: failed,
        converged: [true, true],
    })
}

/// Sign of the difference, provided the interval excludes zero.
pub fn decide_direction_frequentist(fit: &FrequentistFit) -> Decision {
    let excludes_zero = !fit.ci_delta.contains(0.0);
    if fit.delta_rho2 > 0.0 && excludes_zero {
        Decision::UToV
    } else if fit.delta_rho2 < 0.0 && excludes_zero {
        Decision::VToU
    } else {
        Decision::Inconclusive
    }
}
