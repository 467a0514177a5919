use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use super::stats::{median, std_dev};
use crate::error::{invalid, Result};
use crate::es::{
    csa_preset, run_dynamics, Adaptation, CsaPreset, GenerationTrace, Init, SaConfig, SaScheme,
    StopReason, Stops, TauRule,
};
use crate::rng::StreamKey;
use crate::sphere_theory::{sigma_zero_mc, sigma_zero_numeric, PopulationSetup};
use crate::table::{num, opt_num};

/// Adaptation variant measured by a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Csa(CsaPreset),
    Sa(SaScheme, TauRule),
}

impl Family {
    pub fn adaptation(&self, setup: &PopulationSetup) -> Result<Adaptation> {
        Ok(match *self {
            Family::Csa(p) => Adaptation::Csa(csa_preset(p, setup)?),
            Family::Sa(scheme, rule) => Adaptation::Sa(SaConfig::from_rule(rule, scheme, setup.n())?),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Csa(_) => "csa",
            Family::Sa(..) => "sa",
        }
    }

    pub fn variant(&self) -> String {
        match self {
            Family::Csa(p) => p.name().to_string(),
            Family::Sa(s, r) => format!("{s}-{}", r.name()),
        }
    }

    fn tags(&self) -> [u64; 3] {
        match *self {
            Family::Csa(p) => [1, p as u64, 0],
            Family::Sa(s, r) => {
                let rule = match r {
                    TauRule::Sqrt8N => 0,
                    TauRule::Sqrt2N => 1,
                    TauRule::SqrtN => 2,
                    TauRule::Value(t) => t.to_bits(),
                };
                [2, s as u64, rule]
            }
        }
    }
}

/// Generations over which the steady state is read off.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window {
    /// Trials stop once `R < r_end R0` or `sigma < sigma_stop`, with a hard
    /// budget of `10 g_cap` generations. `g_end` is the first generation at
    /// which the median `R` over trials falls below `r_end R0`, capped at
    /// `g_cap`. The window is `[g_end/2, g_end]`.
    Adaptive { r_end: f64, g_cap: u64 },
    /// All trials run for exactly `g_end` generations; the window is `[g0, g_end]`.
    Fixed { g_end: u64, g0: u64 },
}

impl Default for Window {
    fn default() -> Self {
        Window::Adaptive { r_end: 1e-8, g_cap: 10_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    pub grid: Vec<PopulationSetup>,
    pub trials: usize,
    pub seed: u64,
    pub window: Window,
    pub init: Init,
    /// `sigma_stop` in units of `R0`.
    pub sigma_stop: f64,
    /// Trials of the Monte Carlo reference zero used below `N = 100`.
    pub zero_trials: usize,
}

impl SweepSpec {
    pub const MIN_TRIALS: usize = 5;

    pub fn new(family: Family, grid: Vec<PopulationSetup>, trials: usize, seed: u64) -> Self {
        Self {
            family,
            grid,
            trials,
            seed,
            window: Window::default(),
            init: Init::default(),
            sigma_stop: 1e-10,
            zero_trials: 10_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < Self::MIN_TRIALS {
            return Err(invalid(format!("at least {} trials are required, got {}", Self::MIN_TRIALS, self.trials)));
        }
        if self.grid.is_empty() {
            return Err(invalid("sweep grid is empty"));
        }
        match self.window {
            Window::Fixed { g_end, g0 } if g0 >= g_end => {
                Err(invalid(format!("burn-in g0 = {g0} must be below g_end = {g_end}")))
            }
            Window::Adaptive { r_end, .. } if !(r_end > 0.0 && r_end < 1.0) => {
                Err(invalid(format!("r_end must lie in (0, 1), got {r_end}")))
            }
            _ => Ok(()),
        }
    }

    fn point_key(&self, setup: &PopulationSetup) -> StreamKey {
        let [a, b, c] = self.family.tags();
        StreamKey::from_seed(self.seed).derive(&[
            a,
            b,
            c,
            setup.mu() as u64,
            setup.lambda() as u64,
            setup.n() as u64,
        ])
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StopStats {
    pub converged: usize,
    pub unstable: usize,
    pub budget: usize,
}

impl StopStats {
    pub fn from_reasons<'a>(reasons: impl IntoIterator<Item = &'a StopReason>) -> Self {
        let mut s = Self::default();
        for r in reasons {
            match r {
                StopReason::Converged => s.converged += 1,
                StopReason::Unstable => s.unstable += 1,
                StopReason::Budget => s.budget += 1,
            }
        }
        s
    }

    pub fn total(&self) -> usize {
        self.converged + self.unstable + self.budget
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefKind {
    /// Root of the `N`-dependent progress rate.
    Numeric,
    /// Root of the one-generation Monte Carlo estimator.
    MonteCarlo,
}

impl fmt::Display for RefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefKind::Numeric => "numeric",
            RefKind::MonteCarlo => "mc",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateReport {
    pub setup: PopulationSetup,
    pub trials: usize,
    pub g_end: u64,
    /// Absent when more than half of the trials were unstable.
    pub sigma_ss_measured: Option<f64>,
    pub sigma_zero_ref: f64,
    pub ref_kind: RefKind,
    pub gamma: Option<f64>,
    /// Standard deviation of the per-trial `gamma` values.
    pub gamma_spread: Option<f64>,
    /// Median over trials of the mean normalized progress in the window.
    pub phi_meas: Option<f64>,
    pub stop_stats: StopStats,
}

/// Runs `trials` independent dynamics; trial `t` uses the key `key.derive([t])`.
pub fn dynamics_trials(
    setup: &PopulationSetup,
    adaptation: &Adaptation,
    init: Init,
    stops: Stops,
    trials: usize,
    key: &StreamKey,
) -> Result<Vec<GenerationTrace>> {
    (0..trials)
        .into_par_iter()
        .map(|t| run_dynamics(setup, adaptation, init, stops, &key.derive(&[t as u64])))
        .collect()
}

/// Mean of `(R(g) - R(g+1)) N / R(g)` over `g0 <= g < g_end`.
pub fn measure_phi_from_trace(trace: &GenerationTrace, g0: usize) -> Result<f64> {
    let rows = &trace.rows;
    if rows.len() < g0 + 2 {
        return Err(invalid(format!("trace of {} rows is too short for g0 = {g0}", rows.len())));
    }
    let n = trace.n as f64;
    let w = &rows[g0..];
    let sum: f64 = w.windows(2).map(|p| (p[0].r - p[1].r) * n / p[0].r).sum();
    Ok(sum / (w.len() - 1) as f64)
}

fn median_r_below(traces: &[&GenerationTrace], g: usize, level: f64) -> bool {
    let rs: Vec<f64> = traces.iter().map(|t| t.rows.get(g).unwrap_or_else(|| t.last()).r).collect();
    median(&rs).is_some_and(|m| m < level)
}

fn adaptive_g_end(traces: &[GenerationTrace], level: f64) -> u64 {
    let all: Vec<&GenerationTrace> = traces.iter().collect();
    let longest = traces.iter().map(|t| t.rows.len()).max().unwrap_or(1);
    (0..longest)
        .find(|&g| median_r_below(&all, g, level))
        .unwrap_or(longest - 1) as u64
}

fn reference_zero(spec: &SweepSpec, setup: &PopulationSetup) -> Result<(f64, RefKind)> {
    if setup.n() >= 100 {
        Ok((sigma_zero_numeric(setup)?, RefKind::Numeric))
    } else {
        Ok((sigma_zero_mc(setup, spec.zero_trials, spec.seed)?.sigma_zero, RefKind::MonteCarlo))
    }
}

fn measure_point(spec: &SweepSpec, setup: &PopulationSetup) -> Result<SteadyStateReport> {
    let adaptation = spec.family.adaptation(setup)?;
    let r0 = spec.init.r0;
    let stops = match spec.window {
        Window::Adaptive { r_end, g_cap } => {
            Stops { r_stop: r_end * r0, sigma_stop: spec.sigma_stop * r0, g_max: g_cap.saturating_mul(10) }
        }
        Window::Fixed { g_end, .. } => Stops { r_stop: 0.0, sigma_stop: spec.sigma_stop * r0, g_max: g_end },
    };
    let traces = dynamics_trials(setup, &adaptation, spec.init, stops, spec.trials, &spec.point_key(setup))?;
    let stop_stats = StopStats::from_reasons(traces.iter().map(|t| &t.stop_reason));
    let (g_end, g0) = match spec.window {
        Window::Adaptive { r_end, g_cap } => {
            let g_end = adaptive_g_end(&traces, r_end * r0).min(g_cap);
            (g_end, g_end / 2)
        }
        Window::Fixed { g_end, g0 } => (g_end, g0),
    };
    let (sigma_zero_ref, ref_kind) = reference_zero(spec, setup)?;
    let stable: Vec<&GenerationTrace> =
        traces.iter().filter(|t| t.stop_reason != StopReason::Unstable).collect();

    let mut sigma_ss_measured = None;
    let mut gamma_spread = None;
    let mut phi_meas = None;
    if 2 * stop_stats.unstable <= spec.trials {
        let (lo, hi) = (g0 as usize, g_end as usize);
        let series: Vec<f64> = (lo..=hi)
            .filter_map(|g| {
                let at: Vec<f64> = stable.iter().filter_map(|t| t.rows.get(g)).map(|r| r.sigma_star).collect();
                median(&at)
            })
            .collect();
        sigma_ss_measured = median(&series);
        let per_trial: Vec<f64> = stable
            .iter()
            .filter_map(|t| {
                let w: Vec<f64> = t.rows.iter().skip(lo).take(hi + 1 - lo).map(|r| r.sigma_star).collect();
                median(&w).map(|s| s / sigma_zero_ref)
            })
            .collect();
        gamma_spread = std_dev(&per_trial);
        let phis: Vec<f64> = stable
            .iter()
            .filter_map(|t| {
                let cut = GenerationTrace { rows: t.rows[..t.rows.len().min(hi + 1)].to_vec(), ..**t };
                measure_phi_from_trace(&cut, lo).ok()
            })
            .collect();
        phi_meas = median(&phis);
    }
    Ok(SteadyStateReport {
        setup: *setup,
        trials: spec.trials,
        g_end,
        sigma_ss_measured,
        sigma_zero_ref,
        ref_kind,
        gamma: sigma_ss_measured.map(|s| s / sigma_zero_ref),
        gamma_spread,
        phi_meas,
        stop_stats,
    })
}

/// Measured `gamma = sigma*_ss / sigma*_0` for every grid point, in grid order.
///
/// `sigma*_ss` is the median over the window of the per-generation median
/// `sigma*` across the trials that did not become unstable.
pub fn measure_gamma(spec: &SweepSpec) -> Result<Vec<SteadyStateReport>> {
    spec.validate()?;
    spec.grid.par_iter().map(|su| measure_point(spec, su)).collect()
}

pub const GAMMA_CSV_HEADER: &str = "family,variant,mu,lambda,N,trials,g_end,sigma_ss,ref_zero,ref_kind,gamma,gamma_spread,phi_meas,converged,unstable,budget";

pub fn write_gamma_csv<W: Write>(family: &Family, rows: &[SteadyStateReport], mut w: W) -> Result<()> {
    writeln!(w, "{GAMMA_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            family.name(),
            family.variant(),
            r.setup.mu(),
            r.setup.lambda(),
            r.setup.n(),
            r.trials,
            r.g_end,
            opt_num(r.sigma_ss_measured),
            num(r.sigma_zero_ref),
            r.ref_kind,
            opt_num(r.gamma),
            opt_num(r.gamma_spread),
            opt_num(r.phi_meas),
            r.stop_stats.converged,
            r.stop_stats.unstable,
            r.stop_stats.budget
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstabilityReport {
    pub unstable_fraction: f64,
    pub per_trial: Vec<StopReason>,
}

/// Fraction of σSA runs that reach `sigma_stop` before `R_stop`.
pub fn instability_scan(
    setup: &PopulationSetup,
    cfg: &SaConfig,
    trials: usize,
    stops: Stops,
    seed: u64,
) -> Result<InstabilityReport> {
    if trials < 20 {
        return Err(invalid(format!("instability scans need at least 20 trials, got {trials}")));
    }
    if !(stops.r_stop > 0.0 && stops.sigma_stop > 0.0) {
        return Err(invalid("instability scans need both R_stop and sigma_stop"));
    }
    let key = StreamKey::from_seed(seed).derive(&[
        3,
        cfg.scheme as u64,
        cfg.tau.to_bits(),
        setup.mu() as u64,
        setup.lambda() as u64,
        setup.n() as u64,
    ]);
    let per_trial: Vec<StopReason> = (0..trials)
        .into_par_iter()
        .map(|t| {
            run_dynamics(setup, &Adaptation::Sa(*cfg), Init::default(), stops, &key.derive(&[t as u64]))
                .map(|tr| tr.stop_reason)
        })
        .collect::<Result<_>>()?;
    let unstable = per_trial.iter().filter(|r| **r == StopReason::Unstable).count();
    Ok(InstabilityReport { unstable_fraction: unstable as f64 / trials as f64, per_trial })
}
