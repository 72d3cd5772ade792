//! Random-walk Metropolis–Hastings with burn-in-only proposal adaptation.
//!
//! During burn-in the global step size is tuned in batches toward an
//! acceptance rate inside [`TARGET_ACCEPT`], and halfway through burn-in the
//! proposal shape is replaced by the empirical covariance of the chain so
//! far. Everything is frozen once burn-in ends, so retained draws come from
//! a fixed-kernel chain with the intended stationary law.

use rand::Rng;
use rand_distr::StandardNormal;

pub const TARGET_ACCEPT: (f64, f64) = (0.2, 0.45);
const BATCH: usize = 50;
/// Acceptance outside this band after burn-in is flagged.
pub const HEALTHY_ACCEPT: (f64, f64) = (0.05, 0.95);

#[derive(Debug, Clone)]
pub struct SamplerSettings {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Initial per-coordinate proposal standard deviations.
    pub scales: Vec<f64>,
    pub adapt: bool,
}

#[derive(Debug, Clone)]
pub struct SamplerOutput {
    /// Retained states, one row per kept iteration.
    pub draws: Vec<Vec<f64>>,
    /// Iteration number of each retained row.
    pub iterations: Vec<usize>,
    /// Acceptance rate over the post-burn-in iterations.
    pub accept_rate: f64,
    pub burn_in_accept_rate: f64,
    /// Proposal standard deviations in effect after burn-in.
    pub final_scales: Vec<f64>,
}

/// Lower Cholesky factor of a small symmetric positive definite matrix.
fn cholesky(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = m.len();
    let mut l = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let diag = m[i][i] - s;
                if diag <= 0.0 || !diag.is_finite() {
                    return None;
                }
                l[i][i] = diag.sqrt();
            } else {
                l[i][j] = (m[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    for row in cov.iter_mut() {
        for c in row.iter_mut() {
            *c /= n - 1.0;
        }
    }
    cov
}

/// Runs the chain from `init`. `log_target` may return `-inf` outside the support.
pub fn sample<R, F>(rng: &mut R, log_target: F, init: Vec<f64>, settings: &SamplerSettings) -> SamplerOutput
where
    R: Rng,
    F: Fn(&[f64]) -> f64,
{
    let d = init.len();
    let mut shape: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { settings.scales[i] } else { 0.0 }).collect())
        .collect();
    let mut log_step = 0.0f64;
    let mut batch_index = 0usize;
    let mut batch_accepted = 0usize;

    let mut current = init;
    let mut current_lp = log_target(&current);
    let mut proposal = vec![0.0; d];
    let mut z = vec![0.0; d];

    let learn_from = settings.burn_in / 4;
    let learn_at = settings.burn_in / 2;
    let mut history: Vec<Vec<f64>> = Vec::new();

    let kept = (settings.n_iter - settings.burn_in) / settings.thin;
    let mut draws = Vec::with_capacity(kept);
    let mut iterations = Vec::with_capacity(kept);
    let (mut accepted_burn, mut accepted_main) = (0usize, 0usize);

    for t in 0..settings.n_iter {
        let in_burn = t < settings.burn_in;
        let step = log_step.exp();
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for i in 0..d {
            let offset: f64 = (0..=i).map(|j| shape[i][j] * z[j]).sum();
            proposal[i] = current[i] + step * offset;
        }
        let proposal_lp = log_target(&proposal);
        let log_ratio = proposal_lp - current_lp;
        let u: f64 = rng.random();
        let accept = proposal_lp.is_finite() && (log_ratio >= 0.0 || u.ln() < log_ratio);
        if accept {
            current.copy_from_slice(&proposal);
            current_lp = proposal_lp;
            if in_burn {
                accepted_burn += 1;
            } else {
                accepted_main += 1;
            }
        }

        if in_burn && settings.adapt {
            if accept {
                batch_accepted += 1;
            }
            if t >= learn_from && t < learn_at {
                history.push(current.clone());
            }
            if (t + 1) % BATCH == 0 {
                batch_index += 1;
                let rate = batch_accepted as f64 / BATCH as f64;
                let delta = (1.0 / (batch_index as f64).sqrt()).min(0.5);
                if rate < TARGET_ACCEPT.0 {
                    log_step -= delta;
                } else if rate > TARGET_ACCEPT.1 {
                    log_step += delta;
                }
                batch_accepted = 0;
            }
            if t + 1 == learn_at && history.len() > 10 * d {
                let mut cov = covariance(&history);
                let factor = 2.38 * 2.38 / d as f64;
                for (i, row) in cov.iter_mut().enumerate() {
                    for c in row.iter_mut() {
                        *c *= factor;
                    }
                    row[i] += 1e-10;
                }
                if let Some(l) = cholesky(&cov) {
                    shape = l;
                    log_step = 0.0;
                    batch_index = 0;
                }
                history = Vec::new();
            }
        }

        if !in_burn && (t - settings.burn_in).is_multiple_of(settings.thin) {
            draws.push(current.clone());
            iterations.push(t);
        }
    }

    let step = log_step.exp();
    let final_scales = (0..d)
        .map(|i| step * (0..=i).map(|j| shape[i][j] * shape[i][j]).sum::<f64>().sqrt())
        .collect();
    let main_iters = settings.n_iter - settings.burn_in;
    SamplerOutput {
        draws,
        iterations,
        accept_rate: accepted_main as f64 / main_iters.max(1) as f64,
        burn_in_accept_rate: accepted_burn as f64 / settings.burn_in.max(1) as f64,
        final_scales,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{effective_sample_size, mean, variance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn settings(n_iter: usize, burn_in: usize) -> SamplerSettings {
        SamplerSettings {
            n_iter,
            burn_in,
            thin: 1,
            scales: vec![0.1, 0.1],
            adapt: true,
        }
    }

    #[test]
    fn correlated_gaussian_target() {
        // N(mean (1, -2), sd (3, 0.5), corr 0.9)
        let (s1, s2, r) = (3.0, 0.5, 0.9);
        let log_target = |x: &[f64]| {
            let a = (x[0] - 1.0) / s1;
            let b = (x[1] + 2.0) / s2;
            -(a * a - 2.0 * r * a * b + b * b) / (2.0 * (1.0 - r * r))
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = sample(&mut rng, log_target, vec![0.0, 0.0], &settings(60_000, 10_000));
        assert_eq!(out.draws.len(), 50_000);
        assert!(out.accept_rate > 0.15 && out.accept_rate < 0.5, "{}", out.accept_rate);
        let x0: Vec<f64> = out.draws.iter().map(|d| d[0]).collect();
        let x1: Vec<f64> = out.draws.iter().map(|d| d[1]).collect();
        let mcse0 = (variance(&x0) / effective_sample_size(&x0)).sqrt();
        assert!((mean(&x0) - 1.0).abs() < 4.0 * mcse0);
        assert!((variance(&x0).sqrt() - s1).abs() < 0.15 * s1);
        assert!((variance(&x1).sqrt() - s2).abs() < 0.15 * s2);
    }

    #[test]
    fn thinning_and_iterations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = SamplerSettings {
            n_iter: 1000,
            burn_in: 100,
            thin: 3,
            scales: vec![1.0],
            adapt: false,
        };
        let out = sample(&mut rng, |x: &[f64]| -0.5 * x[0] * x[0], vec![0.0], &s);
        assert_eq!(out.draws.len(), 300);
        assert_eq!(out.iterations[0], 100);
        assert_eq!(out.iterations[1], 103);
        assert_eq!(out.final_scales, vec![1.0]);
    }

    #[test]
    fn respects_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let target = |x: &[f64]| if x[0] > 0.0 { -x[0] } else { f64::NEG_INFINITY };
        let s = SamplerSettings {
            n_iter: 5000,
            burn_in: 1000,
            thin: 1,
            scales: vec![0.5],
            adapt: true,
        };
        let out = sample(&mut rng, target, vec![1.0], &s);
        assert!(out.draws.iter().all(|d| d[0] > 0.0));
    }

    #[test]
    fn cholesky_reconstructs() {
        let m = vec![vec![4.0, 2.0, 0.4], vec![2.0, 3.0, 0.5], vec![0.4, 0.5, 1.0]];
        let l = cholesky(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                assert!((v - m[i][j]).abs() < 1e-14);
            }
        }
        assert!(cholesky(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
    }
}
