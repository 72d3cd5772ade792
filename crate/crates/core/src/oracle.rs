//! Ground truth for validating the estimators.
//!
//! Copula families with closed-form Spearman correlation and conditional
//! means, quadrature evaluation of the copula-side definitions
//! (`r(u) = 1 - int C_u(v) dv`, `rho^2 = 12 E[r^2] - 3`,
//! `rho_S = 12 int int C - 3`), seeded samplers, and a directed
//! beta-regression generator whose true direction is known.

use libm::erfc;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::betareg::{logistic, Direction, KappaSpec, KAPPA_CEILING};
use crate::error::{CddError, Result};
use crate::quadrature::{gauss_legendre, integrate, integrate_unit_square};
use crate::sample::PairedSample;
use crate::stats::spearman;

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CopulaSpec {
    Independence,
    /// Farlie–Gumbel–Morgenstern, `C = uv + theta uv(1-u)(1-v)`.
    Fgm {
        theta: f64,
    },
    Gaussian {
        rho: f64,
    },
}

impl CopulaSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CopulaSpec::Independence => Ok(()),
            CopulaSpec::Fgm { theta } if (-1.0..=1.0).contains(&theta) => Ok(()),
            CopulaSpec::Fgm { theta } => Err(CddError::Domain {
                what: "FGM theta",
                value: theta,
            }),
            CopulaSpec::Gaussian { rho } if rho > -1.0 && rho < 1.0 => Ok(()),
            CopulaSpec::Gaussian { rho } => Err(CddError::Domain {
                what: "Gaussian rho",
                value: rho,
            }),
        }
    }

    /// `C(u, v)`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        match *self {
            CopulaSpec::Independence => u * v,
            CopulaSpec::Fgm { theta } => u * v * (1.0 + theta * (1.0 - u) * (1.0 - v)),
            CopulaSpec::Gaussian { rho } => bivariate_normal_cdf(normal_quantile(u), normal_quantile(v), rho),
        }
    }

    /// `P(response <= y | covariate = x)` for the conditional model `dir`.
    pub fn conditional_cdf(&self, dir: Direction, x: f64, y: f64) -> f64 {
        // every family here is exchangeable, so both directions share one formula
        let _ = dir;
        match *self {
            CopulaSpec::Independence => y,
            CopulaSpec::Fgm { theta } => y + theta * y * (1.0 - y) * (1.0 - 2.0 * x),
            CopulaSpec::Gaussian { rho } => {
                let s = (1.0 - rho * rho).sqrt();
                normal_cdf((normal_quantile(y) - rho * normal_quantile(x)) / s)
            }
        }
    }
}

pub fn fgm_rho2(theta: f64) -> f64 {
    theta * theta / 9.0
}

pub fn fgm_spearman(theta: f64) -> f64 {
    theta / 3.0
}

pub fn gaussian_spearman(rho: f64) -> f64 {
    6.0 / std::f64::consts::PI * (rho / 2.0).asin()
}

/// FGM conditional mean `1/2 - theta (1 - 2u) / 6`.
pub fn fgm_conditional_mean(theta: f64, u: f64) -> f64 {
    0.5 - theta * (1.0 - 2.0 * u) / 6.0
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// `P(X <= h, Y <= k)` for standard bivariate normal with correlation `rho`
/// (Drezner–Wesolowsky / Genz method).
pub fn bivariate_normal_cdf(h: f64, k: f64, rho: f64) -> f64 {
    upper_bivariate_normal(-h, -k, rho)
}

// P(X > dh, Y > dk)
fn upper_bivariate_normal(dh: f64, dk: f64, r: f64) -> f64 {
    use std::f64::consts::PI;
    let two_pi = 2.0 * PI;
    let points = if r.abs() < 0.3 {
        6
    } else if r.abs() < 0.75 {
        12
    } else {
        20
    };
    let rule = gauss_legendre(points);
    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = r.asin();
        for &(x, w) in &rule {
            let sn = (asr * (x + 1.0) / 2.0).sin();
            bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        // the full rule already spans both signs of each node
        bvn = bvn * asr / (2.0 * two_pi) + normal_cdf(-h) * normal_cdf(-k);
        return bvn;
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a2 = (1.0 - r) * (1.0 + r);
        let mut a = a2.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -(bs / a2 + hk) / 2.0;
        if asr > -100.0 {
            bvn = a * asr.exp() * (1.0 - c * (bs - a2) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a2 * a2 / 5.0);
        }
        if -hk < 100.0 {
            let b = bs.sqrt();
            bvn -= (-hk / 2.0).exp()
                * two_pi.sqrt()
                * normal_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a /= 2.0;
        for &(x, w) in &rule {
            let xs = (a * (x + 1.0)).powi(2);
            let rs = (1.0 - xs).sqrt();
            let asr = -(bs / xs + hk) / 2.0;
            if asr > -100.0 {
                bvn += a
                    * w
                    * asr.exp()
                    * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > 0.0 {
        bvn += normal_cdf(-h.max(k));
    } else {
        bvn = -bvn;
        if k > h {
            bvn += normal_cdf(k) - normal_cdf(h);
        }
    }
    bvn
}

/// Copula regression `r(x) = E[response | covariate = x] = 1 - int_0^1 C_x(y) dy`.
pub fn conditional_mean_numeric(spec: &CopulaSpec, dir: Direction, x: f64) -> Result<f64> {
    spec.validate()?;
    if !(x > 0.0 && x < 1.0) {
        return Err(CddError::Domain {
            what: "covariate",
            value: x,
        });
    }
    let area = integrate(|y| spec.conditional_cdf(dir, x, y), 0.0, 1.0, INNER_TOL)?;
    Ok(1.0 - area.value)
}

/// Both forms of the directional measure: `(12 E[r^2] - 3, 12 Var(r))`.
pub fn rho2_numeric_forms(spec: &CopulaSpec, dir: Direction) -> Result<(f64, f64)> {
    spec.validate()?;
    let r = |x: f64| conditional_mean_numeric(spec, dir, x).unwrap_or(f64::NAN);
    let second_moment = integrate(|x| r(x).powi(2), 0.0, 1.0, OUTER_TOL)?.value;
    let centered = integrate(|x| (r(x) - 0.5).powi(2), 0.0, 1.0, OUTER_TOL)?.value;
    Ok((12.0 * second_moment - 3.0, 12.0 * centered))
}

/// Directional dependence `12 int_0^1 r(x)^2 dx - 3` by quadrature.
pub fn rho2_numeric(spec: &CopulaSpec, dir: Direction) -> Result<f64> {
    rho2_numeric_forms(spec, dir).map(|(m, _)| m)
}

/// Spearman's rho as `12 int int C(u, v) du dv - 3`.
pub fn spearman_numeric(spec: &CopulaSpec) -> Result<f64> {
    spec.validate()?;
    let total = integrate_unit_square(|u, v| spec.cdf(u, v), 1e-9)?;
    Ok(12.0 * total.value - 3.0)
}

fn open_unit(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// `n` iid draws `(u, v)` from the copula; deterministic in `seed`.
pub fn sample_copula(spec: &CopulaSpec, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = match *spec {
            CopulaSpec::Independence => (Open01.sample(&mut rng), Open01.sample(&mut rng)),
            CopulaSpec::Fgm { theta } => {
                // invert the conditional cdf y + s y (1 - y) = w, s = theta (1 - 2x)
                let x: f64 = Open01.sample(&mut rng);
                let w: f64 = Open01.sample(&mut rng);
                let s = theta * (1.0 - 2.0 * x);
                let disc = ((1.0 + s) * (1.0 + s) - 4.0 * s * w).max(0.0);
                (x, open_unit(2.0 * w / (1.0 + s + disc.sqrt())))
            }
            CopulaSpec::Gaussian { rho } => {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                let y = rho * z1 + (1.0 - rho * rho).sqrt() * z2;
                (open_unit(normal_cdf(z1)), open_unit(normal_cdf(y)))
            }
        };
        u.push(a);
        v.push(b);
    }
    (u, v)
}

/// Sample Spearman correlation of `n` copula draws.
pub fn sample_spearman(spec: &CopulaSpec, n: usize, seed: u64) -> f64 {
    let (u, v) = sample_copula(spec, n, seed);
    spearman(&u, &v)
}

/// Directed beta-regression generator: the covariate is uniform and the
/// response is `Beta(mu kappa, (1 - mu) kappa)` with
/// `mu = logistic(beta0 + beta1 x)`.
///
/// The response marginal is only approximately uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricBeta {
    pub beta0: f64,
    pub beta1: f64,
    pub kappa: KappaSpec,
    /// Ground-truth direction: `UToV` puts the covariate in the first column.
    pub direction: Direction,
}

impl AsymmetricBeta {
    pub fn new(beta0: f64, beta1: f64, kappa: f64, direction: Direction) -> Result<Self> {
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
            direction,
        })
    }

    /// Generator whose precision follows the link, `1 + exp(beta0 + beta1 x)`.
    pub fn link_derived(beta0: f64, beta1: f64, direction: Direction) -> Self {
        Self {
            beta0,
            beta1,
            kappa: KappaSpec::LinkDerived,
            direction,
        }
    }
}

/// Draws `n` raw pairs from the generator, deterministic in `seed`.
pub fn generate_directed(spec: &AsymmetricBeta, n: usize, seed: u64) -> PairedSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cov = Vec::with_capacity(n);
    let mut resp = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = Open01.sample(&mut rng);
        let eta = spec.beta0 + spec.beta1 * x;
        let kappa = match spec.kappa {
            KappaSpec::Free(k) => k,
            KappaSpec::LinkDerived => (1.0 + eta.exp()).min(KAPPA_CEILING),
        };
        let a = (logistic(eta) * kappa).max(f64::MIN_POSITIVE);
        let b = (logistic(-eta) * kappa).max(f64::MIN_POSITIVE);
        let y = Beta::new(a, b).expect("positive shapes").sample(&mut rng);
        cov.push(x);
        resp.push(open_unit(y));
    }
    let (x1, x2) = match spec.direction {
        Direction::UToV => (cov, resp),
        Direction::VToU => (resp, cov),
    };
    PairedSample::new(x1, x2, ("U".to_string(), "V".to_string())).expect("generator output is finite")
}

/// One line of the oracle-equivalence report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationCheck {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ValidationCheck {
    fn new(name: impl Into<String>, computed: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            expected,
            tolerance,
            passed: (computed - expected).abs() <= tolerance,
        }
    }
}

/// Quadrature against closed forms and Monte Carlo against quadrature.
pub fn validation_suite(seed: u64) -> Result<Vec<ValidationCheck>> {
    let mut checks = Vec::new();
    for dir in Direction::BOTH {
        checks.push(ValidationCheck::new(
            format!("rho2 independence {dir}"),
            rho2_numeric(&CopulaSpec::Independence, dir)?,
            0.0,
            1e-9,
        ));
        for theta in [0.3, 0.6, 0.9] {
            checks.push(ValidationCheck::new(
                format!("rho2 FGM({theta}) {dir}"),
                rho2_numeric(&CopulaSpec::Fgm { theta }, dir)?,
                fgm_rho2(theta),
                1e-6,
            ));
        }
    }
    for spec in [CopulaSpec::Fgm { theta: 0.9 }, CopulaSpec::Gaussian { rho: 0.5 }] {
        let (moment, variance) = rho2_numeric_forms(&spec, Direction::UToV)?;
        checks.push(ValidationCheck::new(
            format!("rho2 forms agree {spec:?}"),
            moment,
            variance,
            1e-9,
        ));
    }
    let families = [
        (CopulaSpec::Independence, 0.0),
        (CopulaSpec::Fgm { theta: 1.0 }, fgm_spearman(1.0)),
        (CopulaSpec::Fgm { theta: -0.5 }, fgm_spearman(-0.5)),
        (CopulaSpec::Gaussian { rho: 0.5 }, gaussian_spearman(0.5)),
        (CopulaSpec::Gaussian { rho: -0.8 }, gaussian_spearman(-0.8)),
    ];
    for (i, (spec, closed)) in families.iter().enumerate() {
        let numeric = spearman_numeric(spec)?;
        checks.push(ValidationCheck::new(
            format!("spearman quadrature {spec:?}"),
            numeric,
            *closed,
            1e-6,
        ));
        checks.push(ValidationCheck::new(
            format!("spearman sample(1e5) {spec:?}"),
            sample_spearman(spec, 100_000, seed.wrapping_add(i as u64)),
            numeric,
            0.01,
        ));
    }
    let fgm = CopulaSpec::Fgm { theta: 0.9 };
    checks.push(ValidationCheck::new(
        "FGM conditional mean at u = 0",
        conditional_mean_numeric(&fgm, Direction::UToV, 1e-12)?,
        0.35,
        1e-8,
    ));
    let gauss = CopulaSpec::Gaussian { rho: 0.5 };
    let total = integrate(
        |u| conditional_mean_numeric(&gauss, Direction::UToV, u).unwrap_or(f64::NAN),
        0.0,
        1.0,
        1e-10,
    )?;
    checks.push(ValidationCheck::new("Gaussian(0.5) E[r(U)]", total.value, 0.5, 1e-8));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent route to the bivariate normal cdf: integrate the
    // conditional probability against the standard normal density.
    fn bvn_by_quadrature(h: f64, k: f64, rho: f64) -> f64 {
        let s = (1.0 - rho * rho).sqrt();
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        integrate(|x| phi(x) * normal_cdf((k - rho * x) / s), -12.0, h, 1e-13)
            .unwrap()
            .value
    }

    #[test]
    fn bivariate_normal_against_quadrature() {
        for &rho in &[-0.99, -0.95, -0.8, -0.5, -0.1, 0.0, 0.2, 0.6, 0.9, 0.93, 0.97, 0.999] {
            for &h in &[-2.5, -1.0, 0.0, 0.3, 1.7] {
                for &k in &[-1.9, -0.4, 0.0, 0.8, 2.2] {
                    let a = bivariate_normal_cdf(h, k, rho);
                    let b = bvn_by_quadrature(h, k, rho);
                    assert!((a - b).abs() < 1e-12, "h {h} k {k} rho {rho}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn bivariate_normal_orthant() {
        for &rho in &[-0.9, -0.3, 0.0, 0.5, 0.95] {
            let expected = 0.25 + f64::asin(rho) / (2.0 * std::f64::consts::PI);
            assert!((bivariate_normal_cdf(0.0, 0.0, rho) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-10, 0.001, 0.2, 0.5, 0.77, 0.999_999] {
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-14 * p.max(1e-3) / 1e-3);
        }
    }

    #[test]
    fn conditional_means() {
        for &u in &[0.01, 0.3, 0.5, 0.8] {
            let r = conditional_mean_numeric(&CopulaSpec::Independence, Direction::UToV, u).unwrap();
            assert!((r - 0.5).abs() < 1e-12);
        }
        let fgm = CopulaSpec::Fgm { theta: 0.9 };
        for &u in &[1e-9, 0.1, 0.5, 0.75] {
            let r = conditional_mean_numeric(&fgm, Direction::UToV, u).unwrap();
            assert!((r - fgm_conditional_mean(0.9, u)).abs() < 1e-8);
        }
        assert!(conditional_mean_numeric(&fgm, Direction::UToV, 0.0).is_err());
        assert!(conditional_mean_numeric(&fgm, Direction::UToV, 1.0).is_err());
        for spec in [
            fgm,
            CopulaSpec::Gaussian { rho: 0.7 },
            CopulaSpec::Gaussian { rho: -0.4 },
        ] {
            for &u in &[0.05, 0.2, 0.45] {
                let a = conditional_mean_numeric(&spec, Direction::UToV, u).unwrap();
                let b = conditional_mean_numeric(&spec, Direction::UToV, 1.0 - u).unwrap();
                assert!(((a + b) / 2.0 - 0.5).abs() < 1e-8, "{spec:?} {u}");
            }
        }
    }

    #[test]
    fn conditional_mean_integrates_to_half() {
        for spec in [
            CopulaSpec::Independence,
            CopulaSpec::Fgm { theta: -0.6 },
            CopulaSpec::Gaussian { rho: 0.8 },
        ] {
            for dir in Direction::BOTH {
                let total = integrate(|u| conditional_mean_numeric(&spec, dir, u).unwrap(), 0.0, 1.0, 1e-10).unwrap();
                assert!((total.value - 0.5).abs() < 1e-8, "{spec:?}");
            }
        }
    }

    #[test]
    fn rho2_oracles() {
        assert!(rho2_numeric(&CopulaSpec::Independence, Direction::UToV).unwrap().abs() < 1e-9);
        for theta in [0.3, 0.6, 0.9, -0.9] {
            let spec = CopulaSpec::Fgm { theta };
            let uv = rho2_numeric(&spec, Direction::UToV).unwrap();
            let vu = rho2_numeric(&spec, Direction::VToU).unwrap();
            assert!((uv - theta * theta / 9.0).abs() < 1e-6);
            assert!((uv - vu).abs() < 1e-9);
        }
        for spec in [
            CopulaSpec::Fgm { theta: 0.4 },
            CopulaSpec::Gaussian { rho: 0.6 },
            CopulaSpec::Independence,
        ] {
            let (a, b) = rho2_numeric_forms(&spec, Direction::UToV).unwrap();
            assert!((a - b).abs() < 1e-9);
            assert!(a >= -1e-12);
        }
    }

    #[test]
    fn spearman_closed_forms() {
        assert!(spearman_numeric(&CopulaSpec::Independence).unwrap().abs() < 1e-9);
        for theta in [-1.0, 0.4, 1.0] {
            let s = spearman_numeric(&CopulaSpec::Fgm { theta }).unwrap();
            assert!((s - theta / 3.0).abs() < 1e-6);
        }
        for rho in [-0.7, 0.5, 0.95] {
            let s = spearman_numeric(&CopulaSpec::Gaussian { rho }).unwrap();
            assert!((s - gaussian_spearman(rho)).abs() < 1e-6, "{rho}: {s}");
        }
        assert!((gaussian_spearman(0.5) - 0.482_583_739_530_997_4).abs() < 1e-12);
    }

    #[test]
    fn gaussian_cdf_matches_integrated_conditional() {
        let spec = CopulaSpec::Gaussian { rho: 0.6 };
        for &(u, v) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.1)] {
            let by_parts = integrate(|s| spec.conditional_cdf(Direction::UToV, s, v), 0.0, u, 1e-13).unwrap();
            assert!((spec.cdf(u, v) - by_parts.value).abs() < 1e-11);
        }
    }

    #[test]
    fn samplers_are_seeded_and_in_range() {
        for spec in [
            CopulaSpec::Independence,
            CopulaSpec::Fgm { theta: 0.9 },
            CopulaSpec::Gaussian { rho: -0.3 },
        ] {
            let a = sample_copula(&spec, 500, 3);
            assert_eq!(a, sample_copula(&spec, 500, 3));
            assert!(a.0.iter().chain(&a.1).all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn sample_spearman_near_truth() {
        assert!(sample_spearman(&CopulaSpec::Independence, 100_000, 1).abs() < 0.01);
        assert!((sample_spearman(&CopulaSpec::Gaussian { rho: 0.5 }, 100_000, 2) - 0.48269).abs() < 0.01);
        assert!((sample_spearman(&CopulaSpec::Fgm { theta: 1.0 }, 100_000, 3) - 1.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn directed_generator() {
        let spec = AsymmetricBeta::new(-1.5, 3.0, 8.0, Direction::VToU).unwrap();
        let s = generate_directed(&spec, 300, 8);
        assert_eq!(s, generate_directed(&spec, 300, 8));
        // covariate sits in the second column for V -> U
        assert!(s.x2().iter().all(|&x| x > 0.0 && x < 1.0));
        let m = s.x1().iter().sum::<f64>() / 300.0;
        assert!((m - 0.5).abs() < 0.05);
        assert!(spearman(s.x1(), s.x2()) > 0.4);
        assert!(AsymmetricBeta::new(0.0, 1.0, 0.0, Direction::UToV).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(CopulaSpec::Fgm { theta: 1.5 }.validate().is_err());
        assert!(CopulaSpec::Gaussian { rho: 1.0 }.validate().is_err());
        assert!(spearman_numeric(&CopulaSpec::Gaussian { rho: -1.0 }).is_err());
    }

    #[test]
    fn suite_passes() {
        let checks = validation_suite(1).unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
    }
}
