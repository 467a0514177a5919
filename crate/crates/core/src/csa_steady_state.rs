//! Steady state of CSA on the sphere: deterministic iteration of the
//! expected path and mutation-strength dynamics, and the closed-form
//! prediction of `gamma = sigma*_ss / sigma*_0`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::coefficients::{e_chi, generalized_coefficients};
use crate::error::{domain, invalid, Error, Result};
use crate::es::{csa_preset, CsaConfig, CsaPreset};
use crate::sphere_theory::{
    phi_full_c, phi_large_c, sigma_zero_approx, sigma_zero_numeric, PopulationSetup,
};
use crate::table::{num, opt_num};

/// Which approximation order of `phi*`, `E[z_A]` and `E||z||^2` drives an
/// iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExpectedValueSet {
    /// `N`-dependent expressions.
    Full,
    /// `sigma*^2 / 2N >> 1` limits; `E||z||^2 = N/mu`.
    LargePopulation,
}

/// Expected values of the recombined mutation at a given `sigma*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedValues {
    pub phi: f64,
    pub z_a: f64,
    pub z_norm_sq: f64,
}

impl ExpectedValueSet {
    pub fn at(self, sigma_star: f64, setup: &PopulationSetup) -> ExpectedValues {
        let (c, mu, n) = (setup.c_theta(), setup.mu() as f64, setup.n() as f64);
        let s = sigma_star;
        match self {
            ExpectedValueSet::Full => {
                let (e11, e20) = generalized_coefficients(setup.theta());
                let q = 1.0 + s * s / (2.0 * n);
                let z_a = c / q.sqrt();
                ExpectedValues {
                    phi: phi_full_c(s, c, mu, n),
                    z_a,
                    z_norm_sq: (n + (e11 + (mu - 1.0) * e20) / q - (n - 1.0) / n * s * z_a) / mu,
                }
            }
            ExpectedValueSet::LargePopulation => ExpectedValues {
                phi: phi_large_c(s, c, mu, n),
                z_a: (2.0 * n).sqrt() * c / s,
                z_norm_sq: n / mu,
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IterationScheme {
    /// Full expected values, exact exponential update, `R`-ratio kept in `s_A`.
    It1A,
    /// As `It1A` with the `R`-ratio in `s_A` set to one.
    It1B,
    /// Large-population values, linearized update in `||s||`.
    It2A,
    /// Large-population values, linearized update in `||s||^2`.
    It2B,
}

impl IterationScheme {
    pub const ALL: [IterationScheme; 4] =
        [IterationScheme::It1A, IterationScheme::It1B, IterationScheme::It2A, IterationScheme::It2B];

    pub fn name(self) -> &'static str {
        match self {
            IterationScheme::It1A => "1A",
            IterationScheme::It1B => "1B",
            IterationScheme::It2A => "2A",
            IterationScheme::It2B => "2B",
        }
    }

    pub fn expected_values(self) -> ExpectedValueSet {
        match self {
            IterationScheme::It1A | IterationScheme::It1B => ExpectedValueSet::Full,
            IterationScheme::It2A | IterationScheme::It2B => ExpectedValueSet::LargePopulation,
        }
    }
}

impl fmt::Display for IterationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for IterationScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim_start_matches(['I', 'i', 'T', 't', '_', '-']).to_ascii_uppercase();
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == t)
            .ok_or_else(|| invalid(format!("unknown iteration scheme {s:?} (1A, 1B, 2A, 2B)")))
    }
}

/// Expected path state `(||s||^2, s_A)` and `sigma*` after `g` iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationState {
    pub s_norm_sq: f64,
    pub s_a: f64,
    pub sigma_star: f64,
    pub g: u64,
}

impl IterationState {
    /// `||s||^2 = s_A = 0` at the large-population zero.
    pub fn initial(setup: &PopulationSetup) -> Self {
        Self { s_norm_sq: 0.0, s_a: 0.0, sigma_star: sigma_zero_approx(setup), g: 0 }
    }

    fn max_rel_change(&self, next: &Self) -> f64 {
        let rel = |a: f64, b: f64| {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 { 0.0 } else { (b - a).abs() / scale }
        };
        rel(self.s_norm_sq, next.s_norm_sq)
            .max(rel(self.s_a, next.s_a))
            .max(rel(self.sigma_star, next.sigma_star))
    }
}

/// One application of the scheme's three update maps. `cfg` may use either
/// rule; it is converted to rule V1 first.
pub fn iterate_step(
    scheme: IterationScheme,
    state: &IterationState,
    setup: &PopulationSetup,
    cfg: &CsaConfig,
) -> IterationState {
    let cs = cfg.c_sigma;
    let d = cfg.effective_damping();
    let (mu, n) = (setup.mu() as f64, setup.n() as f64);
    let s = state.sigma_star;
    let ev = scheme.expected_values().at(s, setup);
    let k = (cs * (2.0 - cs) * mu).sqrt();

    let s_norm_sq = (1.0 - cs).powi(2) * state.s_norm_sq
        + 2.0 * (1.0 - cs) * k * state.s_a * ev.z_a
        + cs * (2.0 - cs) * mu * ev.z_norm_sq;
    let inner = (1.0 - cs) * state.s_a - (1.0 - cs) * s / n * state.s_a * ev.z_a + k * ev.z_a
        - k * s / n * ev.z_norm_sq;
    let shrink = 1.0 - ev.phi / n;
    let s_a = match scheme {
        IterationScheme::It1A => inner / shrink,
        _ => inner,
    };
    let sigma_star = match scheme {
        IterationScheme::It1A | IterationScheme::It1B => {
            s / shrink * ((s_norm_sq.sqrt() / e_chi(setup.n()) - 1.0) / d).exp()
        }
        IterationScheme::It2A => {
            let ex = e_chi(setup.n());
            s * (1.0 + ev.phi / n + (s_norm_sq.sqrt() - ex) / (d * ex))
        }
        IterationScheme::It2B => s * (1.0 + ev.phi / n + (s_norm_sq - n) / (2.0 * d * n)),
    };
    IterationState { s_norm_sq, s_a, sigma_star, g: state.g + 1 }
}

pub const ITERATION_REL_TOL: f64 = 1e-12;
pub const ITERATION_CAP: u64 = 100_000;

/// Converged fixed point of an iteration scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationReport {
    pub scheme: IterationScheme,
    pub state: IterationState,
    pub sigma_ss: f64,
    /// `sigma_zero_numeric` for the full schemes, `sigma_zero_approx` otherwise.
    pub sigma_zero_ref: f64,
    pub gamma: f64,
}

fn excerpt(states: &[IterationState]) -> String {
    states
        .iter()
        .map(|s| format!("g={} s2={:.6e} sA={:.6e} sigma*={:.6e}", s.g, s.s_norm_sq, s.s_a, s.sigma_star))
        .collect::<Vec<_>>()
        .join("; ")
}

fn diverged(state: &IterationState, cap: f64) -> bool {
    !(state.sigma_star > 0.0 && state.sigma_star < cap)
        || !state.s_norm_sq.is_finite()
        || !state.s_a.is_finite()
}

/// Iterates until the largest relative change of `(||s||^2, s_A, sigma*)`
/// drops below [`ITERATION_REL_TOL`].
pub fn iterate_scheme(
    scheme: IterationScheme,
    setup: &PopulationSetup,
    cfg: &CsaConfig,
) -> Result<IterationReport> {
    cfg.validate()?;
    let zero_approx = sigma_zero_approx(setup);
    let cap = 1e6 * zero_approx;
    let mut state = IterationState::initial(setup);
    let mut recent = std::collections::VecDeque::with_capacity(6);
    loop {
        let next = iterate_step(scheme, &state, setup, cfg);
        if recent.len() == 6 {
            recent.pop_front();
        }
        recent.push_back(next);
        if diverged(&next, cap) {
            return Err(Error::NonConvergent {
                iterations: next.g as usize,
                reason: "sigma* left (0, inf)".into(),
                excerpt: excerpt(recent.make_contiguous()),
            });
        }
        let change = state.max_rel_change(&next);
        state = next;
        if change < ITERATION_REL_TOL {
            break;
        }
        if state.g >= ITERATION_CAP {
            return Err(Error::NonConvergent {
                iterations: state.g as usize,
                reason: format!("relative change {change:.3e} after the iteration cap"),
                excerpt: excerpt(recent.make_contiguous()),
            });
        }
    }
    let sigma_zero_ref = match scheme.expected_values() {
        ExpectedValueSet::Full => sigma_zero_numeric(setup)?,
        ExpectedValueSet::LargePopulation => zero_approx,
    };
    Ok(IterationReport {
        scheme,
        state,
        sigma_ss: state.sigma_star,
        sigma_zero_ref,
        gamma: state.sigma_star / sigma_zero_ref,
    })
}

/// The first `generations + 1` iterates, starting with the initial state.
pub fn trajectory(
    scheme: IterationScheme,
    setup: &PopulationSetup,
    cfg: &CsaConfig,
    generations: u64,
) -> Vec<IterationState> {
    let mut out = vec![IterationState::initial(setup)];
    for _ in 0..generations {
        let next = iterate_step(scheme, out.last().unwrap(), setup, cfg);
        out.push(next);
    }
    out
}

pub const TRAJECTORY_CSV_HEADER: &str = "g,s_norm_sq,s_A,sigma_star";

pub fn write_trajectory_csv<W: Write>(states: &[IterationState], mut w: W) -> Result<()> {
    writeln!(w, "{TRAJECTORY_CSV_HEADER}")?;
    for s in states {
        writeln!(w, "{},{},{},{}", s.g, num(s.s_norm_sq), num(s.s_a), num(s.sigma_star))?;
    }
    Ok(())
}

/// Substitutions of the large-population steady-state condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormInputs {
    /// `sqrt(2N) c_theta`
    pub a: f64,
    /// `(1 - c_sigma) / (D (c_sigma + (1 - c_sigma) a / N))`
    pub b: f64,
}

impl ClosedFormInputs {
    pub fn new(cfg: &CsaConfig, setup: &PopulationSetup) -> Result<Self> {
        cfg.validate()?;
        let cs = cfg.c_sigma;
        let d = cfg.effective_damping();
        let n = setup.n() as f64;
        let a = (2.0 * n).sqrt() * setup.c_theta();
        Ok(Self { a, b: (1.0 - cs) / (d * (cs + (1.0 - cs) * a / n)) })
    }

    /// Positive root `x = sigma*^2 / (a mu)` of `x^2 + 2(b - 1)x - 2b = 0`.
    pub fn x(&self) -> f64 {
        x_of_b(self.b)
    }
}

fn x_of_b(b: f64) -> f64 {
    (1.0 + b * b).sqrt() - b + 1.0
}

pub fn closed_form_b(cfg: &CsaConfig, setup: &PopulationSetup) -> Result<f64> {
    Ok(ClosedFormInputs::new(cfg, setup)?.b)
}

/// `(2N)^(1/4) sqrt(c_theta mu) sqrt(x(b))` for a given `b >= 0`.
pub fn sigma_ss_for_b(b: f64, setup: &PopulationSetup) -> Result<f64> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(domain(format!("b must be finite and non-negative, got {b}")));
    }
    let (c, mu, n) = (setup.c_theta(), setup.mu() as f64, setup.n() as f64);
    Ok((2.0 * n).powf(0.25) * (c * mu).sqrt() * x_of_b(b).sqrt())
}

pub fn closed_form_sigma_ss(cfg: &CsaConfig, setup: &PopulationSetup) -> Result<f64> {
    sigma_ss_for_b(closed_form_b(cfg, setup)?, setup)
}

/// `sqrt((sqrt(1 + b^2) - b + 1) / 2)`, in `(1/sqrt 2, 1]` for `b >= 0`.
pub fn gamma_of_b(b: f64) -> Result<f64> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(domain(format!("b must be finite and non-negative, got {b}")));
    }
    Ok((0.5 * x_of_b(b)).sqrt())
}

pub fn closed_form_gamma(cfg: &CsaConfig, setup: &PopulationSetup) -> Result<f64> {
    gamma_of_b(closed_form_b(cfg, setup)?)
}

/// Inverse of [`gamma_of_b`] on `1/sqrt 2 < gamma < 1`.
pub fn b_from_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > std::f64::consts::FRAC_1_SQRT_2 && gamma < 1.0) {
        return Err(domain(format!("gamma must lie in (1/sqrt 2, 1), got {gamma}")));
    }
    let g2 = gamma * gamma;
    Ok(2.0 * (g2 - g2 * g2) / (2.0 * g2 - 1.0))
}

/// One-parameter families of `(mu, N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sweep {
    /// Grid over `mu` at fixed `N`.
    VaryMu { n: usize },
    /// Grid over `N` at fixed `mu`.
    VaryN { mu: usize },
    /// Grid over `N` with `mu = 2N`.
    MuTwiceN,
}

impl Sweep {
    /// `(mu, N)` for one grid value.
    pub fn point(self, value: usize) -> (usize, usize) {
        match self {
            Sweep::VaryMu { n } => (value, n),
            Sweep::VaryN { mu } => (mu, value),
            Sweep::MuTwiceN => (2 * value, value),
        }
    }

    pub fn name(self) -> String {
        match self {
            Sweep::VaryMu { n } => format!("vary-mu-N{n}"),
            Sweep::VaryN { mu } => format!("vary-N-mu{mu}"),
            Sweep::MuTwiceN => "mu-2N".into(),
        }
    }

    /// Population setups for `grid` at truncation ratio `theta`.
    pub fn setups(self, grid: &[usize], theta: f64) -> Result<Vec<PopulationSetup>> {
        if grid.is_empty() {
            return Err(invalid("sweep grid is empty"));
        }
        grid.iter()
            .map(|&v| {
                let (mu, n) = self.point(v);
                PopulationSetup::with_ratio(mu, theta, n)
            })
            .collect()
    }
}

/// Log-spaced default grid.
pub const DEFAULT_GRID: [usize; 6] = [10, 30, 100, 300, 1000, 3000];

/// Rule-V1 form of a preset: `DEFAULT_CMA` enters through
/// `D = 1 + 1/c_sigma + g/c_sigma`.
pub fn preset_rule_v1(preset: CsaPreset, setup: &PopulationSetup) -> Result<CsaConfig> {
    Ok(csa_preset(preset, setup)?.as_rule_v1())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictionRow {
    pub preset: CsaPreset,
    pub setup: PopulationSetup,
    pub gamma_pred: f64,
    /// `gamma` of schemes 1A, 1B, 2A, 2B; absent where the scheme did not converge.
    pub gamma_iter: [Option<f64>; 4],
    pub sigma_ss: f64,
    pub ref_zero: f64,
}

impl PredictionRow {
    pub fn compute(preset: CsaPreset, setup: PopulationSetup) -> Result<Self> {
        let cfg = preset_rule_v1(preset, &setup)?;
        let gamma_iter = IterationScheme::ALL.map(|sc| iterate_scheme(sc, &setup, &cfg).ok().map(|r| r.gamma));
        Ok(Self {
            preset,
            setup,
            gamma_pred: closed_form_gamma(&cfg, &setup)?,
            gamma_iter,
            sigma_ss: closed_form_sigma_ss(&cfg, &setup)?,
            ref_zero: sigma_zero_numeric(&setup)?,
        })
    }
}

pub const PREDICTION_CSV_HEADER: &str =
    "preset,mu,lambda,N,gamma_pred,gamma_iter1a,gamma_iter1b,gamma_iter2a,gamma_iter2b,sigma_ss,ref_zero,ref_kind";

/// Closed-form and iterated `gamma` across a sweep, in grid order.
pub fn predicted_gamma_sweep(
    preset: CsaPreset,
    sweep: Sweep,
    grid: &[usize],
    theta: f64,
) -> Result<Vec<PredictionRow>> {
    sweep
        .setups(grid, theta)?
        .into_par_iter()
        .map(|su| PredictionRow::compute(preset, su))
        .collect()
}

pub fn write_prediction_csv<W: Write>(rows: &[PredictionRow], mut w: W) -> Result<()> {
    writeln!(w, "{PREDICTION_CSV_HEADER}")?;
    for r in rows {
        let [a, b, c, d] = r.gamma_iter.map(opt_num);
        writeln!(
            w,
            "{},{},{},{},{},{a},{b},{c},{d},{},{},numeric",
            r.preset,
            r.setup.mu(),
            r.setup.lambda(),
            r.setup.n(),
            num(r.gamma_pred),
            num(r.sigma_ss),
            num(r.ref_zero),
        )?;
    }
    Ok(())
}
