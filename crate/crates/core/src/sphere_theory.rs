//! Progress-rate theory of the `(mu/mu_I, lambda)`-ES on the sphere.
//!
//! Three approximation levels of the normalized progress rate `phi*` are
//! provided, all with the asymptotic coefficient `c_theta`:
//!
//! - [`phi_full`]: the `N`-dependent rate without its `O(N^-1/2)` remainder,
//! - [`phi_medium`]: the large-`mu N` expansion,
//! - [`phi_large`]: additionally `sigma*^2 / 2N >> 1`.
//!
//! The zero of [`phi_large`] is available in closed form,
//! `(8N)^(1/4) (c_theta mu)^(1/2)` ([`sigma_zero_approx`]); the zero of
//! [`phi_full`] is found numerically ([`sigma_zero_numeric`]) or, for small
//! `N`, from one-generation experiments ([`sigma_zero_mc`]).

use crate::coefficients::{c_theta, TruncationRatio};
use crate::error::{domain, invalid, Error, Result};
use crate::harness::{one_generation_phi_with, OneGenerationPlan};
use crate::roots::{brent_root, golden_max, RootTolerance};

/// `mu` parents, `lambda` offspring, search-space dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PopulationSetup {
    mu: usize,
    lambda: usize,
    n: usize,
}

impl PopulationSetup {
    pub fn new(mu: usize, lambda: usize, n: usize) -> Result<Self> {
        if mu == 0 || mu >= lambda {
            return Err(invalid(format!("need 1 <= mu < lambda, got mu = {mu}, lambda = {lambda}")));
        }
        if n == 0 {
            return Err(invalid("dimension N must be at least 1"));
        }
        Ok(Self { mu, lambda, n })
    }

    /// Setup with `lambda = round(mu / theta)`.
    pub fn with_ratio(mu: usize, theta: f64, n: usize) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(domain(format!("truncation ratio must lie in (0, 1), got {theta}")));
        }
        Self::new(mu, (mu as f64 / theta).round() as usize, n)
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> TruncationRatio {
        TruncationRatio::from_populations(self.mu, self.lambda).expect("validated on construction")
    }

    pub fn c_theta(&self) -> f64 {
        c_theta(self.theta())
    }
}

/// Normalized mutation strength and progress, `sigma* = sigma N / R`,
/// `phi* = phi N / R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedState {
    pub sigma_star: f64,
    pub phi_star: f64,
}

pub fn normalize_sigma(sigma: f64, r: f64, n: usize) -> f64 {
    sigma * n as f64 / r
}

pub fn denormalize_sigma(sigma_star: f64, r: f64, n: usize) -> f64 {
    sigma_star * r / n as f64
}

pub(crate) fn phi_full_c(s: f64, c: f64, mu: f64, n: f64) -> f64 {
    let s2 = s * s;
    let q_mu = (1.0 + s2 / (mu * n)).sqrt();
    let q_n = (1.0 + s2 / (2.0 * n)).sqrt();
    c * s * (1.0 + s2 / (2.0 * mu * n)) / (q_mu * q_n) - n * (q_mu - 1.0)
}

pub(crate) fn phi_large_c(s: f64, c: f64, mu: f64, n: f64) -> f64 {
    (2.0 * n).sqrt() * c - s * s / (2.0 * mu)
}

fn dims(setup: &PopulationSetup) -> (f64, f64, f64) {
    (setup.c_theta(), setup.mu as f64, setup.n as f64)
}

/// Sphere progress rate with `N`-dependent terms and `c_theta` in place of
/// `c_{mu/mu,lambda}`.
pub fn phi_full(sigma_star: f64, setup: &PopulationSetup) -> f64 {
    let (c, mu, n) = dims(setup);
    phi_full_c(sigma_star, c, mu, n)
}

/// `c sigma* / sqrt(1 + sigma*^2/2N) - sigma*^2 / 2mu`.
pub fn phi_medium(sigma_star: f64, setup: &PopulationSetup) -> f64 {
    let (c, mu, n) = dims(setup);
    c * sigma_star / (1.0 + sigma_star * sigma_star / (2.0 * n)).sqrt()
        - sigma_star * sigma_star / (2.0 * mu)
}

/// `sqrt(2N) c - sigma*^2 / 2mu`.
pub fn phi_large(sigma_star: f64, setup: &PopulationSetup) -> f64 {
    let (c, mu, n) = dims(setup);
    phi_large_c(sigma_star, c, mu, n)
}

/// Closed-form zero of [`phi_large`], `(8N)^(1/4) (c_theta mu)^(1/2)`.
pub fn sigma_zero_approx(setup: &PopulationSetup) -> f64 {
    let (c, mu, n) = dims(setup);
    (8.0 * n).powf(0.25) * (c * mu).sqrt()
}

/// `gamma * sigma_zero_approx`.
pub fn sigma_ss_from_gamma(gamma: f64, setup: &PopulationSetup) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(domain(format!("gamma must lie in (0, 1], got {gamma}")));
    }
    Ok(gamma * sigma_zero_approx(setup))
}

fn coarse_opt(c: f64, mu: f64, n: f64, hi: f64) -> f64 {
    golden_max(|s| phi_full_c(s, c, mu, n), 0.0, hi, 1e-10)
}

/// Second (non-trivial) zero of [`phi_full`], `|phi_full| <= 1e-10` there.
pub fn sigma_zero_numeric(setup: &PopulationSetup) -> Result<f64> {
    let (c, mu, n) = dims(setup);
    let hi = 4.0 * sigma_zero_approx(setup);
    let lo = coarse_opt(c, mu, n, hi);
    let tol = RootTolerance { f_abs: 1e-10, x_rel: 1e-15, max_iter: 500 };
    let root = brent_root(|s| phi_full_c(s, c, mu, n), lo, hi, tol)?;
    let residual = phi_full_c(root, c, mu, n);
    if residual.abs() > 1e-10 {
        return Err(Error::Bracketing { lo, hi, f_lo: phi_full_c(lo, c, mu, n), f_hi: residual });
    }
    Ok(root)
}

/// Maximizer of [`phi_full`] on `(0, sigma*_0)`.
pub fn sigma_opt(setup: &PopulationSetup) -> Result<f64> {
    let (c, mu, n) = dims(setup);
    let zero = sigma_zero_numeric(setup)?;
    Ok(golden_max(|s| phi_full_c(s, c, mu, n), 0.0, zero, 1e-9))
}

/// Zero of the one-generation Monte Carlo progress rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McZero {
    pub sigma_zero: f64,
    /// Half-width of the 95% band on `sigma_zero` from the standard error of
    /// `phi*` at the root and the local slope.
    pub band: f64,
    pub phi_std_err: f64,
}

/// Root of the one-generation progress-rate estimator. Every evaluation
/// reuses the same random streams, so the estimator is a deterministic
/// function of `sigma*` and the root is well defined for a given seed.
pub fn sigma_zero_mc(setup: &PopulationSetup, trials: usize, seed: u64) -> Result<McZero> {
    if trials < 2 {
        return Err(domain("sigma_zero_mc needs at least two trials"));
    }
    let plan = OneGenerationPlan::new(*setup, None, trials, seed);
    let (c, mu, n) = dims(setup);
    let hi = 4.0 * sigma_zero_approx(setup);
    let lo = coarse_opt(c, mu, n, hi);
    let mut failure = None;
    let mut eval = |s: f64| match one_generation_phi_with(&plan, s) {
        Ok(e) => e.mean,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let tol = RootTolerance { f_abs: 0.0, x_rel: 1e-7, max_iter: 100 };
    let root = brent_root(&mut eval, lo, hi, tol);
    if let Some(e) = failure {
        return Err(e);
    }
    let root = root?;
    let at_root = one_generation_phi_with(&plan, root)?;
    let h = 0.02 * root;
    let slope = (one_generation_phi_with(&plan, root + h)?.mean
        - one_generation_phi_with(&plan, root - h)?.mean)
        / (2.0 * h);
    Ok(McZero {
        sigma_zero: root,
        band: 1.96 * at_root.std_err / slope.abs(),
        phi_std_err: at_root.std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(mu: usize, n: usize) -> PopulationSetup {
        PopulationSetup::with_ratio(mu, 0.5, n).unwrap()
    }

    #[test]
    fn setup_validation() {
        assert!(PopulationSetup::new(0, 10, 5).is_err());
        assert!(PopulationSetup::new(10, 10, 5).is_err());
        assert!(PopulationSetup::new(1, 10, 0).is_err());
        let s = PopulationSetup::new(5, 20, 3).unwrap();
        assert_eq!(s.theta().value(), 0.25);
        assert_eq!(setup(1000, 100).lambda(), 2000);
    }

    #[test]
    fn normalization_roundtrip() {
        for (sigma, r) in [(0.3, 2.0), (1e-7, 1e-4), (5.0, 123.0)] {
            let star = normalize_sigma(sigma, r, 100);
            assert!((denormalize_sigma(star, r, 100) - sigma).abs() <= 1e-15 * sigma);
        }
    }

    #[test]
    fn rates_vanish_at_zero() {
        let s = setup(1000, 100);
        assert_eq!(phi_full(0.0, &s), 0.0);
        assert_eq!(phi_medium(0.0, &s), 0.0);
        assert!((phi_large(0.0, &s) - 200f64.sqrt() * s.c_theta()).abs() < 1e-15);
    }

    #[test]
    fn small_sigma_slope_is_c_theta() {
        let s = setup(1000, 100);
        let h = 1e-6;
        let slope = (phi_full(h, &s) - phi_full(0.0, &s)) / h;
        assert!((slope - s.c_theta()).abs() < 1e-6);
    }

    #[test]
    fn zero_matches_reported_value() {
        let s = setup(1000, 100);
        let z = sigma_zero_numeric(&s).unwrap();
        assert!((z - 154.5).abs() < 0.05, "{z}");
        assert!(phi_full(z, &s).abs() <= 1e-10);
        assert!(phi_full(0.99 * z, &s) > 0.0);
        assert!(phi_full(1.01 * z, &s) < 0.0);
        assert!(z > sigma_zero_approx(&s));
    }

    #[test]
    fn large_rate_zero_is_closed_form() {
        for (mu, n) in [(10, 10), (100, 100), (1000, 100), (3000, 1000)] {
            let s = setup(mu, n);
            let z = sigma_zero_approx(&s);
            assert!(phi_large(z, &s).abs() < 1e-12 * (2.0 * n as f64).sqrt());
        }
        assert!((sigma_zero_approx(&setup(1000, 100)) - 150.225).abs() < 1e-3);
    }

    #[test]
    fn optimum_is_stationary_and_precedes_zero() {
        let s = setup(100, 100);
        let opt = sigma_opt(&s).unwrap();
        assert!(opt <= 20.0, "{opt}");
        let h = 1e-4;
        let d = (phi_full(opt + h, &s) - phi_full(opt - h, &s)) / (2.0 * h);
        assert!(d.abs() < 1e-5, "{d}");
        for (mu, n) in [(10, 10), (1000, 100), (30, 1000)] {
            let s = setup(mu, n);
            assert!(sigma_opt(&s).unwrap() < sigma_zero_numeric(&s).unwrap());
        }
    }

    #[test]
    fn gamma_parameterization() {
        let s = setup(1000, 100);
        assert_eq!(sigma_ss_from_gamma(1.0, &s).unwrap(), sigma_zero_approx(&s));
        let g = sigma_ss_from_gamma(0.88, &s).unwrap();
        assert!((g - 132.2).abs() < 0.05, "{g}");
        let a = sigma_ss_from_gamma(0.3, &s).unwrap();
        let b = sigma_ss_from_gamma(0.6, &s).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert!(sigma_ss_from_gamma(0.0, &s).is_err());
        assert!(sigma_ss_from_gamma(1.2, &s).is_err());
    }

    #[test]
    fn zero_grows_with_mu_and_n() {
        let mut prev = 0.0;
        for mu in [10, 30, 100, 300, 1000, 3000] {
            let z = sigma_zero_numeric(&setup(mu, 100)).unwrap();
            assert!(z > prev);
            prev = z;
        }
        prev = 0.0;
        for n in [10, 30, 100, 300, 1000] {
            let z = sigma_zero_numeric(&setup(100, n)).unwrap();
            assert!(z > prev);
            prev = z;
        }
    }
}
