//! Posterior inference for both conditional beta regressions and the
//! posterior probability of each direction.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::betareg::{direction_log_likelihood, fitted_means, rho_squared_from_means, BetaRegCoefficients, Direction};
use crate::error::{CddError, Result};
use crate::frequentist::Interval;
use crate::mcmc::{self, SamplerSettings, HEALTHY_ACCEPT};
use crate::sample::PseudoSample;
use crate::stats::{effective_sample_size, equal_tailed, mean, variance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum KappaMode {
    /// `kappa = 1 + exp(beta0 + beta1 x)`; the chain moves `(beta0, beta1)` only.
    LinkDerived,
    /// Free precision with a `Gamma(shape = a, rate = b)` prior.
    GammaPrior { a: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// Prior standard deviation of the intercept.
    pub sigma0: f64,
    /// Prior standard deviation of the slope.
    pub sigma1: f64,
    pub kappa_mode: KappaMode,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            sigma0: 10.0,
            sigma1: 10.0,
            kappa_mode: KappaMode::GammaPrior { a: 1.0, b: 1.0 },
        }
    }
}

impl PriorSpec {
    pub fn link_derived() -> Self {
        Self {
            kappa_mode: KappaMode::LinkDerived,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut values = vec![("sigma0", self.sigma0), ("sigma1", self.sigma1)];
        if let KappaMode::GammaPrior { a, b } = self.kappa_mode {
            values.push(("gamma shape", a));
            values.push(("gamma rate", b));
        }
        for (what, value) in values {
            if !(value > 0.0 && value.is_finite()) {
                return Err(CddError::Domain { what, value });
            }
        }
        Ok(())
    }

    fn free_kappa(&self) -> bool {
        matches!(self.kappa_mode, KappaMode::GammaPrior { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Initial proposal standard deviations for `beta0`, `beta1`, `log kappa`.
    pub proposal_scales: [f64; 3],
    pub adapt: bool,
    pub seed: u64,
    /// Credible level for the reported intervals.
    pub level: f64,
    /// Exchange the random streams of the two directions.
    ///
    /// Running on swapped columns with this flag flipped reproduces the
    /// original chains with their roles exchanged.
    pub mirror_streams: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_iter: 10_000,
            burn_in: 2_000,
            thin: 1,
            proposal_scales: [0.1, 0.1, 0.1],
            adapt: true,
            seed: 0,
            level: 0.95,
            mirror_streams: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CddError::InvalidConfig(msg));
        if self.n_iter == 0 || self.burn_in >= self.n_iter {
            return bad(format!("burn-in {} must be below n_iter {}", self.burn_in, self.n_iter));
        }
        if self.thin == 0 {
            return bad("thin must be at least 1".into());
        }
        if !(self.n_iter - self.burn_in).is_multiple_of(self.thin) {
            return bad(format!(
                "n_iter - burn_in = {} is not a multiple of thin = {}",
                self.n_iter - self.burn_in,
                self.thin
            ));
        }
        if self.proposal_scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return bad("proposal scales must be positive".into());
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad(format!("level {} not in (0, 1)", self.level));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    /// Same settings with the per-direction random streams exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            mirror_streams: !self.mirror_streams,
            ..self.clone()
        }
    }

    fn stream(&self, dir: Direction) -> u64 {
        match (dir, self.mirror_streams) {
            (Direction::UToV, false) | (Direction::VToU, true) => 0,
            _ => 1,
        }
    }
}

/// One chain state. `kappa` is `None` when the precision is link-derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub beta0: f64,
    pub beta1: f64,
    pub kappa: Option<f64>,
}

impl ChainState {
    pub fn coefficients(&self) -> Result<BetaRegCoefficients> {
        match self.kappa {
            None => Ok(BetaRegCoefficients::link_derived(self.beta0, self.beta1)),
            Some(k) => BetaRegCoefficients::free(self.beta0, self.beta1, k),
        }
    }
}

fn normal_log_density(x: f64, sd: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI).ln() - sd.ln() - 0.5 * (x / sd) * (x / sd)
}

fn log_prior(state: &ChainState, prior: &PriorSpec) -> f64 {
    let mut lp = normal_log_density(state.beta0, prior.sigma0) + normal_log_density(state.beta1, prior.sigma1);
    if let KappaMode::GammaPrior { a, b } = prior.kappa_mode {
        match state.kappa {
            Some(k) if k > 0.0 && k.is_finite() => lp += a * b.ln() - ln_gamma(a) + (a - 1.0) * k.ln() - b * k,
            _ => return f64::NEG_INFINITY,
        }
    }
    lp
}

/// Unnormalized log posterior of one conditional model (normalized priors,
/// exact likelihood). Out-of-support states give `-inf`.
pub fn log_posterior(ps: &PseudoSample, dir: Direction, state: &ChainState, prior: &PriorSpec) -> f64 {
    PosteriorTarget {
        data: Some((ps, dir)),
        prior: *prior,
    }
    .log_density(state)
}

/// The density a chain targets; `data: None` drops the likelihood so the
/// chain samples the prior.
#[derive(Debug, Clone, Copy)]
pub struct PosteriorTarget<'a> {
    pub data: Option<(&'a PseudoSample, Direction)>,
    pub prior: PriorSpec,
}

impl PosteriorTarget<'_> {
    pub fn log_density(&self, state: &ChainState) -> f64 {
        let effective = ChainState {
            kappa: if self.prior.free_kappa() { state.kappa } else { None },
            ..*state
        };
        let lp = log_prior(&effective, &self.prior);
        if !lp.is_finite() {
            return f64::NEG_INFINITY;
        }
        let Some((ps, dir)) = self.data else {
            return lp;
        };
        let ll = effective
            .coefficients()
            .and_then(|coef| direction_log_likelihood(ps, dir, &coef))
            .unwrap_or(f64::NEG_INFINITY);
        let total = lp + ll;
        if total.is_nan() {
            f64::NEG_INFINITY
        } else {
            total
        }
    }

    fn state_from(&self, x: &[f64]) -> ChainState {
        ChainState {
            beta0: x[0],
            beta1: x[1],
            kappa: self.prior.free_kappa().then(|| x[2].exp()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRun {
    pub states: Vec<ChainState>,
    pub iterations: Vec<usize>,
    pub accept_rate: f64,
    pub final_scales: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Random-walk MH on `(beta0, beta1)` plus `log kappa` in Gamma-prior mode.
///
/// The log-scale move on the precision is symmetric, so its Jacobian
/// `log kappa` is added to the target.
pub fn run_chain_on(target: &PosteriorTarget<'_>, cfg: &McmcConfig, stream: u64) -> Result<ChainRun> {
    cfg.validate()?;
    target.prior.validate()?;
    let free = target.prior.free_kappa();
    let dim = if free { 3 } else { 2 };
    let settings = SamplerSettings {
        n_iter: cfg.n_iter,
        burn_in: cfg.burn_in,
        thin: cfg.thin,
        scales: cfg.proposal_scales[..dim].to_vec(),
        adapt: cfg.adapt,
    };
    let log_target = |x: &[f64]| {
        let lp = target.log_density(&target.state_from(x));
        if free {
            lp + x[2]
        } else {
            lp
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let out = mcmc::sample(&mut rng, log_target, vec![0.0; dim], &settings);

    let mut warnings = Vec::new();
    if out.accept_rate < HEALTHY_ACCEPT.0 || out.accept_rate > HEALTHY_ACCEPT.1 {
        warnings.push(format!(
            "acceptance rate {:.3} outside [{}, {}]",
            out.accept_rate, HEALTHY_ACCEPT.0, HEALTHY_ACCEPT.1
        ));
    }
    Ok(ChainRun {
        states: out.draws.iter().map(|x| target.state_from(x)).collect(),
        iterations: out.iterations,
        accept_rate: out.accept_rate,
        final_scales: out.final_scales,
        warnings,
    })
}

pub fn run_chain(ps: &PseudoSample, dir: Direction, prior: &PriorSpec, cfg: &McmcConfig) -> Result<ChainRun> {
    let target = PosteriorTarget {
        data: Some((ps, dir)),
        prior: *prior,
    };
    run_chain_on(&target, cfg, cfg.stream(dir))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraws {
    /// Chain of the `V | U` model.
    pub draws_uv: Vec<ChainState>,
    /// Chain of the `U | V` model.
    pub draws_vu: Vec<ChainState>,
    pub rho2_uv_draws: Vec<f64>,
    pub rho2_vu_draws: Vec<f64>,
    pub iterations: Vec<usize>,
    pub accept_rate_uv: f64,
    pub accept_rate_vu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub beta0_mean: f64,
    pub beta0_sd: f64,
    pub beta1_mean: f64,
    pub beta1_sd: f64,
    pub kappa_mean: Option<f64>,
}

impl CoefficientSummary {
    fn from_states(states: &[ChainState]) -> Self {
        let b0: Vec<f64> = states.iter().map(|s| s.beta0).collect();
        let b1: Vec<f64> = states.iter().map(|s| s.beta1).collect();
        let kappas: Vec<f64> = states.iter().filter_map(|s| s.kappa).collect();
        Self {
            beta0_mean: mean(&b0),
            beta0_sd: variance(&b0).sqrt(),
            beta1_mean: mean(&b1),
            beta1_sd: variance(&b1).sqrt(),
            kappa_mean: (!kappas.is_empty()).then(|| mean(&kappas)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub accept_rate_uv: f64,
    pub accept_rate_vu: f64,
    pub ess_rho2_uv: f64,
    pub ess_rho2_vu: f64,
    pub ess_beta1_uv: f64,
    pub ess_beta1_vu: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesianFit {
    pub mean_rho2_uv: f64,
    pub mean_rho2_vu: f64,
    pub mean_delta: f64,
    pub cred_uv: Interval,
    pub cred_vu: Interval,
    pub cred_delta: Interval,
    /// Fraction of paired draws with `rho2_uv > rho2_vu`.
    pub prob_u_to_v: f64,
    pub decision: Direction,
    pub coef_uv: CoefficientSummary,
    pub coef_vu: CoefficientSummary,
    pub diagnostics: ChainDiagnostics,
}

impl BayesianFit {
    pub fn prob_v_to_u(&self) -> f64 {
        1.0 - self.prob_u_to_v
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// `UToV` iff the posterior probability exceeds `threshold`; ties go to `VToU`.
pub fn decide_direction_bayesian(fit: &BayesianFit, threshold: f64) -> Direction {
    if fit.prob_u_to_v > threshold {
        Direction::UToV
    } else {
        Direction::VToU
    }
}

fn rho2_along(ps: &PseudoSample, dir: Direction, states: &[ChainState]) -> Result<Vec<f64>> {
    states
        .iter()
        .map(|s| Ok(rho_squared_from_means(&fitted_means(ps, dir, &s.coefficients()?))))
        .collect()
}

/// Samples both directions and summarizes the induced posterior of the
/// directional measures.
pub fn estimate_bayesian(
    ps: &PseudoSample,
    prior: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<(PosteriorDraws, BayesianFit)> {
    cfg.validate()?;
    prior.validate()?;
    let (uv, vu) = rayon::join(
        || run_chain(ps, Direction::UToV, prior, cfg),
        || run_chain(ps, Direction::VToU, prior, cfg),
    );
    let (uv, vu) = (uv?, vu?);
    let rho2_uv = rho2_along(ps, Direction::UToV, &uv.states)?;
    let rho2_vu = rho2_along(ps, Direction::VToU, &vu.states)?;
    let deltas: Vec<f64> = rho2_uv.iter().zip(&rho2_vu).map(|(a, b)| a - b).collect();

    let favour_uv = rho2_uv.iter().zip(&rho2_vu).filter(|(a, b)| a > b).count();
    let prob_u_to_v = favour_uv as f64 / rho2_uv.len() as f64;

    let interval = |xs: &[f64]| {
        let (lower, upper) = equal_tailed(xs, cfg.level);
        Interval {
            lower,
            upper,
            level: cfg.level,
        }
    };
    let beta1 = |states: &[ChainState]| states.iter().map(|s| s.beta1).collect::<Vec<_>>();
    let mut warnings: Vec<String> = uv.warnings.iter().map(|w| format!("U->V chain: {w}")).collect();
    warnings.extend(vu.warnings.iter().map(|w| format!("V->U chain: {w}")));

    let mut fit = BayesianFit {
        mean_rho2_uv: mean(&rho2_uv),
        mean_rho2_vu: mean(&rho2_vu),
        mean_delta: mean(&deltas),
        cred_uv: interval(&rho2_uv),
        cred_vu: interval(&rho2_vu),
        cred_delta: interval(&deltas),
        prob_u_to_v,
        decision: Direction::VToU,
        coef_uv: CoefficientSummary::from_states(&uv.states),
        coef_vu: CoefficientSummary::from_states(&vu.states),
        diagnostics: ChainDiagnostics {
            accept_rate_uv: uv.accept_rate,
            accept_rate_vu: vu.accept_rate,
            ess_rho2_uv: effective_sample_size(&rho2_uv),
            ess_rho2_vu: effective_sample_size(&rho2_vu),
            ess_beta1_uv: effective_sample_size(&beta1(&uv.states)),
            ess_beta1_vu: effective_sample_size(&beta1(&vu.states)),
            warnings,
        },
    };
    fit.decision = decide_direction_bayesian(&fit, DEFAULT_THRESHOLD);

    let draws = PosteriorDraws {
        draws_uv: uv.states,
        draws_vu: vu.states,
        rho2_uv_draws: rho2_uv,
        rho2_vu_draws: rho2_vu,
        iterations: uv.iterations,
        accept_rate_uv: uv.accept_rate,
        accept_rate_vu: vu.accept_rate,
    };
    Ok((draws, fit))
}

/// Writes one comma-separated record per retained iteration and direction:
/// `iter,direction,beta0,beta1,kappa,rho2`. `kappa` is empty when link-derived.
pub fn write_chain_dump<W: Write>(out: W, draws: &PosteriorDraws) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "direction", "beta0", "beta1", "kappa", "rho2"])?;
    for (dir, states, rho2) in [
        (Direction::UToV, &draws.draws_uv, &draws.rho2_uv_draws),
        (Direction::VToU, &draws.draws_vu, &draws.rho2_vu_draws),
    ] {
        for ((iter, s), r) in draws.iterations.iter().zip(states).zip(rho2) {
            w.write_record([
                iter.to_string(),
                dir.as_str().to_string(),
                s.beta0.to_string(),
                s.beta1.to_string(),
                s.kappa.map(|k| k.to_string()).unwrap_or_default(),
                r.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| CddError::Io {
        path: "<chain dump>".into(),
        source: e,
    })?;
    Ok(())
}
