use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::manifest::Manifest;
use super::one_gen::{one_generation_phi_with, OneGenerationPlan};
use super::stats::median;
use super::steady::{dynamics_trials, measure_gamma, measure_phi_from_trace, write_gamma_csv, Family, SweepSpec, Window};
use crate::csa_steady_state::{
    predicted_gamma_sweep, preset_rule_v1, trajectory, write_prediction_csv, write_trajectory_csv,
    IterationScheme, Sweep, DEFAULT_GRID,
};
use crate::error::{invalid, Error, Result};
use crate::es::{CsaPreset, GenerationTrace, Init, SaConfig, SaScheme, Stops, TauRule};
use crate::rng::StreamKey;
use crate::sa_steady_state::{predicted_sa_sweep, write_sa_prediction_csv};
use crate::sphere_theory::{
    phi_full, phi_large, sigma_opt, sigma_zero_approx, sigma_zero_numeric, PopulationSetup,
};
use crate::table::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureTag {
    Fig1,
    Fig2A,
    Fig2B,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureTag {
    pub const ALL: [FigureTag; 7] = [
        FigureTag::Fig1,
        FigureTag::Fig2A,
        FigureTag::Fig2B,
        FigureTag::Fig3,
        FigureTag::Fig4,
        FigureTag::Fig5,
        FigureTag::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureTag::Fig1 => "fig1",
            FigureTag::Fig2A => "fig2a",
            FigureTag::Fig2B => "fig2b",
            FigureTag::Fig3 => "fig3",
            FigureTag::Fig4 => "fig4",
            FigureTag::Fig5 => "fig5",
            FigureTag::Fig6 => "fig6",
        }
    }
}

impl fmt::Display for FigureTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.to_ascii_lowercase();
        let t = t.strip_prefix("fig").unwrap_or(&t);
        Self::ALL
            .into_iter()
            .find(|f| &f.name()[3..] == t)
            .ok_or_else(|| invalid(format!("unknown figure tag {s:?}")))
    }
}

/// Replacements for the figure defaults. `None` keeps the default.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FigureOverrides {
    /// Dynamics trials per configuration or grid point.
    pub trials: Option<usize>,
    /// Trials per one-generation progress-rate estimate.
    pub phi_trials: Option<usize>,
    /// Points on a `sigma*` grid.
    pub points: Option<usize>,
    /// Values of the swept parameter (`mu` or `N`) for every panel.
    pub grid: Option<Vec<usize>>,
    /// Generation cap of dynamics runs and iteration trajectories.
    pub g_cap: Option<u64>,
    pub mu: Option<usize>,
    pub lambda: Option<usize>,
    pub n: Option<usize>,
}

struct Out<'a> {
    dir: &'a Path,
    manifest: Manifest,
    written: Vec<PathBuf>,
}

impl Out<'_> {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.dir.join(name);
        self.manifest.file(name);
        self.written.push(path.clone());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut w = self.create(name)?;
        w.write_all(body.as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

/// Writes the data files, a gnuplot script and `manifest.txt` for `tag`
/// into `dir`, returning the paths written.
pub fn figure_data(tag: FigureTag, ov: &FigureOverrides, seed: u64, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Out { dir, manifest: Manifest::new(format!("figure {tag}")), written: Vec::new() };
    out.manifest.param("seed", seed);
    match tag {
        FigureTag::Fig1 => fig1(ov, seed, &mut out)?,
        FigureTag::Fig2A => fig2(ov, seed, &mut out, false)?,
        FigureTag::Fig2B => fig2(ov, seed, &mut out, true)?,
        FigureTag::Fig3 => fig3(ov, &mut out)?,
        FigureTag::Fig4 => fig4(ov, seed, &mut out)?,
        FigureTag::Fig5 => fig5(ov, seed, &mut out)?,
        FigureTag::Fig6 => fig6(ov, seed, &mut out)?,
    }
    let path = out.manifest.write(dir)?;
    out.written.push(path);
    Ok(out.written)
}

fn setup_or(ov: &FigureOverrides, mu: usize, lambda: usize, n: usize) -> Result<PopulationSetup> {
    let mu = ov.mu.unwrap_or(mu);
    let lambda = ov.lambda.unwrap_or(if ov.mu.is_some() { 2 * mu } else { lambda });
    PopulationSetup::new(mu, lambda, ov.n.unwrap_or(n))
}

/// Per-generation medians of `R`, `sigma` and `sigma*` over the trials that
/// are still running.
fn write_median_dynamics<W: Write>(traces: &[GenerationTrace], mut w: W) -> Result<()> {
    writeln!(w, "g,R_median,sigma_median,sigma_star_median,running")?;
    let longest = traces.iter().map(|t| t.rows.len()).max().unwrap_or(0);
    for g in 0..longest {
        let rows: Vec<_> = traces.iter().filter_map(|t| t.rows.get(g)).collect();
        let m = |f: fn(&crate::es::TraceRow) -> f64| median(&rows.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap();
        writeln!(w, "{g},{},{},{},{}", num(m(|r| r.r)), num(m(|r| r.sigma)), num(m(|r| r.sigma_star)), rows.len())?;
    }
    Ok(())
}

/// Convergence-rate runs last a fixed 5000 generations with no other stop.
pub const FIG1_STOPS: Stops = Stops { r_stop: 0.0, sigma_stop: 0.0, g_max: 5_000 };
pub const FIG1_BURN_IN: usize = 20;

pub fn fig1_configs() -> [(&'static str, Family); 4] {
    [
        ("sqrtN", Family::Csa(CsaPreset::SqrtN)),
        ("linN", Family::Csa(CsaPreset::LinN)),
        ("saln-sqrt2N", Family::Sa(SaScheme::LogNormal, TauRule::Sqrt2N)),
        ("saln-sqrt8N", Family::Sa(SaScheme::LogNormal, TauRule::Sqrt8N)),
    ]
}

pub fn fig1_key(seed: u64, config: usize) -> StreamKey {
    StreamKey::from_seed(seed).derive(&[0xf1, config as u64])
}

/// Convergence-rate measurement of one configuration from [`fig1_configs`].
#[derive(Clone, Debug, PartialEq)]
pub struct Fingerprint {
    pub config: &'static str,
    /// Mean normalized progress from generation `FIG1_BURN_IN` on, per trial.
    pub phi_meas: Vec<f64>,
    pub phi_meas_median: Option<f64>,
    /// Median over trials of the per-trial median `sigma*` after the burn-in.
    pub sigma_star_ss_median: Option<f64>,
}

/// Runs `trials` dynamics of configuration `config` of [`fig1_configs`]
/// from the default initialization.
pub fn convergence_fingerprint(
    setup: &PopulationSetup,
    config: usize,
    trials: usize,
    stops: Stops,
    seed: u64,
) -> Result<(Fingerprint, Vec<GenerationTrace>)> {
    let (name, family) = *fig1_configs()
        .get(config)
        .ok_or_else(|| invalid(format!("configuration index {config} out of range")))?;
    let adaptation = family.adaptation(setup)?;
    let traces = dynamics_trials(setup, &adaptation, Init::default(), stops, trials, &fig1_key(seed, config))?;
    let phi_meas: Vec<f64> = traces.iter().filter_map(|t| measure_phi_from_trace(t, FIG1_BURN_IN).ok()).collect();
    let ss: Vec<f64> = traces
        .iter()
        .filter_map(|t| median(&t.rows.iter().skip(FIG1_BURN_IN).map(|r| r.sigma_star).collect::<Vec<_>>()))
        .collect();
    let fp = Fingerprint {
        config: name,
        phi_meas_median: median(&phi_meas),
        phi_meas,
        sigma_star_ss_median: median(&ss),
    };
    Ok((fp, traces))
}

fn fig1(ov: &FigureOverrides, seed: u64, out: &mut Out) -> Result<()> {
    let su = setup_or(ov, 100, 200, 100)?;
    let trials = ov.trials.unwrap_or(10);
    let stops = Stops { g_max: ov.g_cap.unwrap_or(FIG1_STOPS.g_max), ..FIG1_STOPS };
    out.manifest
        .param("mu", su.mu())
        .param("lambda", su.lambda())
        .param("N", su.n())
        .param("trials", trials)
        .param("r_stop", stops.r_stop)
        .param("sigma_stop", stops.sigma_stop)
        .param("g_max", stops.g_max)
        .param("burn_in", FIG1_BURN_IN);
    let mut summary = String::from("config,phi_meas_median,sigma_star_ss_median\n");
    let mut plot = String::from("set datafile separator ','\nset logscale y\nset xlabel 'g'\nset key autotitle columnhead\nplot ");
    for (i, (name, _)) in fig1_configs().into_iter().enumerate() {
        let (fp, traces) = convergence_fingerprint(&su, i, trials, stops, seed)?;
        let file = format!("fig1_dynamics_{name}.csv");
        let mut w = out.create(&file)?;
        write_median_dynamics(&traces, &mut w)?;
        w.flush()?;
        let cell = |v: Option<f64>| v.map(num).unwrap_or_default();
        summary.push_str(&format!("{name},{},{}\n", cell(fp.phi_meas_median), cell(fp.sigma_star_ss_median)));
        if i > 0 {
            plot.push_str(", ");
        }
        plot.push_str(&format!("'{file}' using 'g':'R_median' with lines title '{name}'"));
    }
    plot.push('\n');
    out.text("fig1_summary.csv", &summary)?;

    let zero = sigma_zero_numeric(&su)?;
    let points = ov.points.unwrap_or(20);
    let phi_trials = ov.phi_trials.unwrap_or(10_000);
    out.manifest.param("phi_trials", phi_trials).param("points", points);
    let plans = [TauRule::Sqrt8N, TauRule::Sqrt2N]
        .into_iter()
        .map(|rule| {
            SaConfig::from_rule(rule, SaScheme::LogNormal, su.n())
                .map(|cfg| OneGenerationPlan::new(su, Some(cfg), phi_trials, seed))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut w = out.create("fig1_phi.csv")?;
    writeln!(w, "sigma_star,phi_full,phi_sa_sqrt8N,se_sqrt8N,phi_sa_sqrt2N,se_sqrt2N")?;
    for k in 1..=points {
        let s = 1.1 * zero * k as f64 / points as f64;
        let mut line = format!("{},{}", num(s), num(phi_full(s, &su)));
        for plan in &plans {
            let e = one_generation_phi_with(plan, s)?;
            line.push_str(&format!(",{},{}", num(e.mean), num(e.std_err)));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    plot.push_str("pause -1\nunset logscale y\nset xlabel 'sigma*'\nplot 'fig1_phi.csv' using 1:2 with lines title 'phi*', '' using 1:3:4 with yerrorbars title 'sqrt8N', '' using 1:5:6 with yerrorbars title 'sqrt2N'\n");
    out.text("fig1.gp", &plot)
}

fn fig2(ov: &FigureOverrides, seed: u64, out: &mut Out, ratio: bool) -> Result<()> {
    let name = if ratio { "fig2b" } else { "fig2a" };
    let curve_mus: Vec<usize> = if ratio { vec![100, 200, 400, 1000, 2000] } else { vec![100, 300, 1000, 3000] };
    let curve_mus = ov.grid.clone().unwrap_or(curve_mus);
    let setup = |mu: usize| PopulationSetup::with_ratio(mu, 0.5, if ratio { mu / 2 } else { ov.n.unwrap_or(100) });
    let points = ov.points.unwrap_or(10);
    let phi_trials = ov.phi_trials.unwrap_or(10_000);
    out.manifest.param("mu_curves", format!("{curve_mus:?}")).param("points", points).param("phi_trials", phi_trials);

    let mut w = out.create(&format!("{name}_phi.csv"))?;
    writeln!(w, "mu,lambda,N,sigma_star,phi_full,phi_large,phi_mc,phi_mc_se")?;
    for &mu in &curve_mus {
        let su = setup(mu)?;
        let zero = sigma_zero_numeric(&su)?;
        let plan = OneGenerationPlan::new(su, None, phi_trials, seed);
        for k in 1..=points {
            let s = zero * k as f64 / (points as f64 + 1.0);
            let e = one_generation_phi_with(&plan, s)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                su.mu(),
                su.lambda(),
                su.n(),
                num(s),
                num(phi_full(s, &su)),
                num(phi_large(s, &su)),
                num(e.mean),
                num(e.std_err)
            )?;
        }
    }
    w.flush()?;

    let mut w = out.create(&format!("{name}_zeros.csv"))?;
    writeln!(w, "mu,lambda,N,sigma_zero,sigma_opt,sigma_zero_approx")?;
    let zero_mus: Vec<usize> = if ratio { vec![10, 20, 40, 100, 200, 400, 1000, 2000] } else { DEFAULT_GRID.to_vec() };
    for mu in zero_mus {
        let su = setup(mu)?;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            su.mu(),
            su.lambda(),
            su.n(),
            num(sigma_zero_numeric(&su)?),
            num(sigma_opt(&su)?),
            num(sigma_zero_approx(&su))
        )?;
    }
    w.flush()?;
    let script = format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'sigma*'\n\
         plot '{name}_phi.csv' using 4:5 with lines title 'phi* (N-dependent)', '' using 4:6 with lines dt 2 title 'phi* (large mu)', '' using 4:7:8 with yerrorbars title 'one-generation'\n\
         pause -1\nset logscale x\nset xlabel 'mu'\n\
         plot '{name}_zeros.csv' using 1:4 with linespoints title 'sigma*_0', '' using 1:5 with linespoints title 'argmax', '' using 1:6 with lines dt 2 title 'approx'\n"
    );
    out.text(&format!("{name}.gp"), &script)
}

fn fig3(ov: &FigureOverrides, out: &mut Out) -> Result<()> {
    let su = setup_or(ov, 1000, 2000, 100)?;
    let cfg = preset_rule_v1(CsaPreset::SqrtN, &su)?;
    let generations = ov.g_cap.unwrap_or(100);
    out.manifest
        .param("mu", su.mu())
        .param("lambda", su.lambda())
        .param("N", su.n())
        .param("preset", CsaPreset::SqrtN)
        .param("scheme", IterationScheme::It1A)
        .param("generations", generations);
    let states = trajectory(IterationScheme::It1A, &su, &cfg, generations);
    let mut w = out.create("fig3_iteration.csv")?;
    write_trajectory_csv(&states, &mut w)?;
    w.flush()?;
    out.text(
        "fig3.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'g'\n\
         plot 'fig3_iteration.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines\n",
    )
}

/// The four sweeps of the `gamma` figures.
pub fn panels(ov: &FigureOverrides) -> Vec<(&'static str, Sweep, Vec<usize>)> {
    let n_grid = vec![10, 30, 100, 300, 1000];
    let pick = |d: Vec<usize>| ov.grid.clone().unwrap_or(d);
    vec![
        ("N10", Sweep::VaryMu { n: 10 }, pick(DEFAULT_GRID.to_vec())),
        ("N100", Sweep::VaryMu { n: 100 }, pick(DEFAULT_GRID.to_vec())),
        ("mu1000", Sweep::VaryN { mu: 1000 }, pick(n_grid.clone())),
        ("mu2N", Sweep::MuTwiceN, pick(n_grid)),
    ]
}

/// Default trial count: 100 for small configurations, 5 for the largest, 10 otherwise.
pub fn default_trials(setup: &PopulationSetup) -> usize {
    match setup.mu() * setup.n() {
        p if p <= 1_000 => 100,
        p if p >= 1_000_000 => 5,
        _ => 10,
    }
}

fn measure_panel(family: Family, setups: &[PopulationSetup], ov: &FigureOverrides, seed: u64) -> Result<Vec<crate::harness::SteadyStateReport>> {
    let mut rows = Vec::with_capacity(setups.len());
    for su in setups {
        let trials = ov.trials.unwrap_or_else(|| default_trials(su));
        let mut spec = SweepSpec::new(family, vec![*su], trials, seed);
        if let Some(cap) = ov.g_cap {
            spec.window = Window::Adaptive { r_end: 1e-8, g_cap: cap };
        }
        if let Some(t) = ov.phi_trials {
            spec.zero_trials = t;
        }
        rows.extend(measure_gamma(&spec)?);
    }
    Ok(rows)
}

fn gamma_script(files: &[(String, String)]) -> String {
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset logscale x\nset ylabel 'gamma'\nplot ");
    for (i, (file, col)) in files.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(&format!("'{file}' using '{col}':'gamma' with linespoints title '{file}'"));
    }
    s.push('\n');
    s
}

fn fig4(ov: &FigureOverrides, seed: u64, out: &mut Out) -> Result<()> {
    let mut plotted = Vec::new();
    for (panel, sweep, grid) in panels(ov) {
        out.manifest.param(&format!("panel_{panel}"), format!("{} {grid:?}", sweep.name()));
        let setups = sweep.setups(&grid, 0.5)?;
        let col = if matches!(sweep, Sweep::VaryMu { .. }) { "mu" } else { "N" };
        for preset in CsaPreset::STANDARD {
            let pred = predicted_gamma_sweep(preset, sweep, &grid, 0.5)?;
            let mut w = out.create(&format!("fig4_{panel}_{preset}_predicted.csv"))?;
            write_prediction_csv(&pred, &mut w)?;
            w.flush()?;
            let family = Family::Csa(preset);
            let meas = measure_panel(family, &setups, ov, seed)?;
            let file = format!("fig4_{panel}_{preset}_measured.csv");
            let mut w = out.create(&file)?;
            write_gamma_csv(&family, &meas, &mut w)?;
            w.flush()?;
            plotted.push((file, col.to_string()));
        }
    }
    out.text("fig4.gp", &gamma_script(&plotted))
}

fn fig5(ov: &FigureOverrides, seed: u64, out: &mut Out) -> Result<()> {
    let mut plotted = Vec::new();
    for (panel, sweep, grid) in panels(ov) {
        out.manifest.param(&format!("panel_{panel}"), format!("{} {grid:?}", sweep.name()));
        let setups = sweep.setups(&grid, 0.5)?;
        let col = if matches!(sweep, Sweep::VaryMu { .. }) { "mu" } else { "N" };
        for scheme in [SaScheme::LogNormal, SaScheme::Normal] {
            for rule in [TauRule::Sqrt8N, TauRule::Sqrt2N, TauRule::SqrtN] {
                let tag = format!("{scheme}_{}", rule.name());
                let pred = predicted_sa_sweep(scheme, rule, &setups)?;
                let mut w = out.create(&format!("fig5_{panel}_{tag}_predicted.csv"))?;
                write_sa_prediction_csv(&pred, &mut w)?;
                w.flush()?;
                let family = Family::Sa(scheme, rule);
                let meas = measure_panel(family, &setups, ov, seed)?;
                let file = format!("fig5_{panel}_{tag}_measured.csv");
                let mut w = out.create(&file)?;
                write_gamma_csv(&family, &meas, &mut w)?;
                w.flush()?;
                plotted.push((file, col.to_string()));
            }
        }
    }
    out.text("fig5.gp", &gamma_script(&plotted))
}

fn fig6(ov: &FigureOverrides, seed: u64, out: &mut Out) -> Result<()> {
    let su = setup_or(ov, 10, 20, 100)?;
    let trials = ov.trials.unwrap_or(6);
    let stops = Stops { r_stop: 1e-3, sigma_stop: 1e-10, g_max: ov.g_cap.unwrap_or(1_000_000) };
    out.manifest
        .param("mu", su.mu())
        .param("lambda", su.lambda())
        .param("N", su.n())
        .param("tau_rule", TauRule::SqrtN.name())
        .param("trials", trials)
        .param("r_stop", stops.r_stop)
        .param("sigma_stop", stops.sigma_stop)
        .param("g_max", stops.g_max);
    let mut w = out.create("fig6_traces.csv")?;
    writeln!(w, "scheme,trial,g,R,sigma,stop_reason")?;
    for scheme in [SaScheme::LogNormal, SaScheme::Normal] {
        let cfg = SaConfig::from_rule(TauRule::SqrtN, scheme, su.n())?;
        let key = StreamKey::from_seed(seed).derive(&[0xf6, scheme as u64]);
        let traces = dynamics_trials(&su, &crate::es::Adaptation::Sa(cfg), Init::default(), stops, trials, &key)?;
        for (t, tr) in traces.iter().enumerate() {
            let last = tr.rows.len() - 1;
            for (i, row) in tr.rows.iter().enumerate() {
                let reason = if i == last { tr.stop_reason.name() } else { "" };
                writeln!(w, "{scheme},{t},{},{},{},{reason}", row.g, num(row.r), num(row.sigma))?;
            }
        }
    }
    w.flush()?;
    out.text(
        "fig6.gp",
        "set datafile separator ','\nset logscale y\nset xlabel 'g'\n\
         plot 'fig6_traces.csv' using 3:(strcol(1) eq 'saln' ? $4 : NaN) with lines title 'R saln', \
         '' using 3:(strcol(1) eq 'saln' ? $5 : NaN) with lines dt 2 title 'sigma saln', \
         '' using 3:(strcol(1) eq 'saep' ? $4 : NaN) with lines title 'R saep', \
         '' using 3:(strcol(1) eq 'saep' ? $5 : NaN) with lines dt 2 title 'sigma saep'\n",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_parse() {
        for t in FigureTag::ALL {
            assert_eq!(t.name().parse::<FigureTag>().unwrap(), t);
        }
        assert_eq!("FIG2A".parse::<FigureTag>().unwrap(), FigureTag::Fig2A);
        assert_eq!("3".parse::<FigureTag>().unwrap(), FigureTag::Fig3);
        assert!("fig7".parse::<FigureTag>().is_err());
    }

    #[test]
    fn fig3_writes_trajectory() {
        let dir = tempfile::tempdir().unwrap();
        let files = figure_data(FigureTag::Fig3, &FigureOverrides::default(), 1, dir.path()).unwrap();
        assert_eq!(files.len(), 3);
        let csv = fs::read_to_string(dir.path().join("fig3_iteration.csv")).unwrap();
        assert_eq!(csv.lines().count(), 102);
        let manifest = fs::read_to_string(dir.path().join(Manifest::FILE_NAME)).unwrap();
        assert!(manifest.contains("file = fig3_iteration.csv"));
    }

    #[test]
    fn trial_defaults() {
        let t = |mu, n| default_trials(&PopulationSetup::with_ratio(mu, 0.5, n).unwrap());
        assert_eq!(t(10, 10), 100);
        assert_eq!(t(100, 100), 10);
        assert_eq!(t(2000, 1000), 5);
    }
}
