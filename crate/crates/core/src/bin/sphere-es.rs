use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sphere_es::csa_steady_state::{
    iterate_scheme, predicted_gamma_sweep, preset_rule_v1, trajectory, write_prediction_csv,
    write_trajectory_csv, IterationScheme, Sweep, DEFAULT_GRID,
};
use sphere_es::es::{csa_preset, CsaPreset, Init, SaConfig, SaScheme, Stops, TauRule};
use sphere_es::harness::{
    dynamics_trials, figure_data, instability_scan, measure_gamma, one_generation_phi_with,
    with_threads, write_gamma_csv, Family, FigureOverrides, FigureTag, Manifest, OneGenerationPlan,
    SweepSpec, Window,
};
use sphere_es::rng::StreamKey;
use sphere_es::sa_steady_state::{predicted_sa_sweep, write_sa_prediction_csv};
use sphere_es::sphere_theory::{phi_full, sigma_zero_numeric};
use sphere_es::{PopulationSetup, Result};

#[derive(Parser)]
#[command(name = "sphere-es", version, about = "CSA and self-adaptive ES on the sphere: simulation and steady-state theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run dynamics and write one trace per trial.
    Dynamics(Common),
    /// One-generation Monte Carlo progress rate on a sigma* grid.
    OneGenPhi(Common),
    /// Measure the steady-state ratio gamma over a sweep.
    MeasureGamma(Common),
    /// Iterate the expected-value dynamics of CSA to its fixed point.
    Iterate(Common),
    /// Closed-form gamma predictions over a sweep.
    Predict(Common),
    /// Count σSA runs that reach sigma_stop before R_stop.
    Instability(Common),
    /// Regenerate the data of a figure.
    Figure {
        tag: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TauRuleArg {
    #[value(name = "sqrt8N")]
    Sqrt8N,
    #[value(name = "sqrt2N")]
    Sqrt2N,
    #[value(name = "sqrtN")]
    SqrtN,
    #[value(name = "value")]
    Value,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    #[value(name = "vary-mu")]
    VaryMu,
    #[value(name = "vary-N")]
    VaryN,
    #[value(name = "mu-2N")]
    MuTwiceN,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 100)]
    mu: usize,
    /// Offspring count; defaults to 2 mu.
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    /// CSA preset: sqrtN, linN or default-cma.
    #[arg(long, default_value = "sqrtN")]
    preset: String,
    /// σSA sampling (saln, saep) or, for `iterate`, an iteration scheme (1A, 1B, 2A, 2B, all).
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long = "tau-rule", value_enum, default_value = "sqrt2N")]
    tau_rule: TauRuleArg,
    /// Learning parameter used with `--tau-rule value`.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "g-max")]
    g_max: Option<u64>,
    #[arg(long = "r-stop")]
    r_stop: Option<f64>,
    #[arg(long = "sigma-stop")]
    sigma_stop: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Single sigma* for `one-gen-phi`.
    #[arg(long = "sigma-star")]
    sigma_star: Option<f64>,
    /// Initial sigma* of dynamics runs.
    #[arg(long = "sigma-star0", default_value_t = 1.0)]
    sigma_star0: f64,
    /// Points on the sigma* grid.
    #[arg(long)]
    points: Option<usize>,
    /// Sweep family for `measure-gamma` and `predict`.
    #[arg(long, value_enum, default_value = "vary-mu")]
    sweep: SweepArg,
    /// Comma-separated values of the swept parameter.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Truncation ratio for sweeps.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
}

impl Common {
    fn setup(&self) -> Result<PopulationSetup> {
        PopulationSetup::new(self.mu, self.lambda.unwrap_or(2 * self.mu), self.n)
    }

    fn tau_rule(&self) -> Result<TauRule> {
        Ok(match self.tau_rule {
            TauRuleArg::Sqrt8N => TauRule::Sqrt8N,
            TauRuleArg::Sqrt2N => TauRule::Sqrt2N,
            TauRuleArg::SqrtN => TauRule::SqrtN,
            TauRuleArg::Value => TauRule::Value(self.tau.ok_or_else(|| {
                sphere_es::Error::InvalidConfig("--tau-rule value needs --tau".into())
            })?),
        })
    }

    fn sa_scheme(&self) -> Result<Option<SaScheme>> {
        self.scheme.as_deref().map(str::parse).transpose()
    }

    fn family(&self) -> Result<Family> {
        Ok(match self.sa_scheme()? {
            Some(s) => Family::Sa(s, self.tau_rule()?),
            None => Family::Csa(self.preset.parse()?),
        })
    }

    fn sweep(&self) -> Sweep {
        match self.sweep {
            SweepArg::VaryMu => Sweep::VaryMu { n: self.n },
            SweepArg::VaryN => Sweep::VaryN { mu: self.mu },
            SweepArg::MuTwiceN => Sweep::MuTwiceN,
        }
    }

    fn stops(&self, default: Stops) -> Stops {
        Stops {
            r_stop: self.r_stop.unwrap_or(default.r_stop),
            sigma_stop: self.sigma_stop.unwrap_or(default.sigma_stop),
            g_max: self.g_max.unwrap_or(default.g_max),
        }
    }

    fn manifest(&self, command: &str) -> Manifest {
        let mut m = Manifest::new(command);
        m.param("mu", self.mu)
            .param("lambda", self.lambda.unwrap_or(2 * self.mu))
            .param("N", self.n)
            .param("preset", &self.preset)
            .param("scheme", self.scheme.as_deref().unwrap_or(""))
            .param("tau_rule", self.tau_rule().map(|r| r.name()).unwrap_or_default())
            .param("seed", self.seed)
            .param("threads", self.threads.map(|t| t.to_string()).unwrap_or_else(|| "auto".into()));
        m
    }
}

fn create(dir: &Path, name: &str, manifest: &mut Manifest) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    manifest.file(name);
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn dynamics(c: &Common) -> Result<()> {
    let su = c.setup()?;
    let family = c.family()?;
    let adaptation = family.adaptation(&su)?;
    let stops = c.stops(Stops::default());
    let trials = c.trials.unwrap_or(1);
    let mut m = c.manifest("dynamics");
    m.param("variant", family.variant())
        .param("trials", trials)
        .param("sigma_star0", c.sigma_star0)
        .param("r_stop", stops.r_stop)
        .param("sigma_stop", stops.sigma_stop)
        .param("g_max", stops.g_max);
    let key = StreamKey::from_seed(c.seed);
    let init = Init { r0: 1.0, sigma_star0: c.sigma_star0 };
    let traces = dynamics_trials(&su, &adaptation, init, stops, trials, &key)?;
    for (t, tr) in traces.iter().enumerate() {
        let mut w = create(&c.out, &format!("dynamics_trial{t}.csv"), &mut m)?;
        tr.write_csv(&mut w)?;
        w.flush()?;
        println!("trial {t}: {} after {} generations, R = {:.3e}", tr.stop_reason, tr.last().g, tr.last().r);
    }
    m.write(&c.out)?;
    Ok(())
}

fn one_gen_phi(c: &Common) -> Result<()> {
    let su = c.setup()?;
    let sa = match c.sa_scheme()? {
        Some(s) => Some(SaConfig::from_rule(c.tau_rule()?, s, su.n())?),
        None => None,
    };
    let trials = c.trials.unwrap_or(10_000);
    let zero = sigma_zero_numeric(&su)?;
    let points = c.points.unwrap_or(10);
    let grid: Vec<f64> = match c.sigma_star {
        Some(s) => vec![s],
        None => (1..=points).map(|k| zero * k as f64 / (points as f64 + 1.0)).collect(),
    };
    let mut m = c.manifest("one-gen-phi");
    m.param("trials", trials).param("points", grid.len());
    let plan = OneGenerationPlan::new(su, sa, trials, c.seed);
    let mut w = create(&c.out, "one_gen_phi.csv", &mut m)?;
    writeln!(w, "sigma_star,phi_mean,phi_std_err,phi_full")?;
    for s in grid {
        let e = one_generation_phi_with(&plan, s)?;
        writeln!(w, "{s:.16e},{:.16e},{:.16e},{:.16e}", e.mean, e.std_err, phi_full(s, &su))?;
        println!("sigma* = {s:.4}: phi* = {:.4} +- {:.4} (theory {:.4})", e.mean, e.std_err, phi_full(s, &su));
    }
    w.flush()?;
    m.write(&c.out)?;
    Ok(())
}

fn sweep_setups(c: &Common) -> Result<Vec<PopulationSetup>> {
    match &c.grid {
        Some(g) => c.sweep().setups(g, c.theta),
        None => Ok(vec![c.setup()?]),
    }
}

fn cmd_measure_gamma(c: &Common) -> Result<()> {
    let family = c.family()?;
    let grid = sweep_setups(c)?;
    let mut spec = SweepSpec::new(family, grid, c.trials.unwrap_or(10), c.seed);
    spec.init.sigma_star0 = c.sigma_star0;
    if let Some(s) = c.sigma_stop {
        spec.sigma_stop = s;
    }
    if let Some(cap) = c.g_max {
        spec.window = Window::Adaptive { r_end: 1e-8, g_cap: cap };
    }
    let mut m = c.manifest("measure-gamma");
    m.param("variant", family.variant()).param("trials", spec.trials).param("window", format!("{:?}", spec.window));
    let rows = measure_gamma(&spec)?;
    let mut w = create(&c.out, "gamma.csv", &mut m)?;
    write_gamma_csv(&family, &rows, &mut w)?;
    w.flush()?;
    for r in &rows {
        println!(
            "mu = {}, N = {}: gamma = {} (converged {}, unstable {}, budget {})",
            r.setup.mu(),
            r.setup.n(),
            r.gamma.map(|g| format!("{g:.4}")).unwrap_or_else(|| "n/a".into()),
            r.stop_stats.converged,
            r.stop_stats.unstable,
            r.stop_stats.budget
        );
    }
    m.write(&c.out)?;
    Ok(())
}

fn iterate(c: &Common) -> Result<()> {
    let su = c.setup()?;
    let preset: CsaPreset = c.preset.parse()?;
    let cfg = preset_rule_v1(preset, &su)?;
    let schemes: Vec<IterationScheme> = match c.scheme.as_deref() {
        None | Some("all") => IterationScheme::ALL.to_vec(),
        Some(s) => vec![s.parse()?],
    };
    let mut m = c.manifest("iterate");
    let mut w = create(&c.out, "iteration.csv", &mut m)?;
    writeln!(w, "scheme,preset,mu,lambda,N,iterations,sigma_ss,sigma_zero_ref,gamma")?;
    for sc in &schemes {
        let r = iterate_scheme(*sc, &su, &cfg)?;
        writeln!(
            w,
            "{sc},{preset},{},{},{},{},{:.16e},{:.16e},{:.16e}",
            su.mu(),
            su.lambda(),
            su.n(),
            r.state.g,
            r.sigma_ss,
            r.sigma_zero_ref,
            r.gamma
        )?;
        println!("{sc}: sigma*_ss = {:.4}, sigma*_0 = {:.4}, gamma = {:.4}", r.sigma_ss, r.sigma_zero_ref, r.gamma);
    }
    w.flush()?;
    let generations = c.g_max.unwrap_or(100);
    let mut w = create(&c.out, &format!("trajectory_{}.csv", schemes[0]), &mut m)?;
    write_trajectory_csv(&trajectory(schemes[0], &su, &cfg, generations), &mut w)?;
    w.flush()?;
    m.write(&c.out)?;
    Ok(())
}

fn predict(c: &Common) -> Result<()> {
    let mut m = c.manifest("predict");
    let grid = c.grid.clone().unwrap_or_else(|| DEFAULT_GRID.to_vec());
    m.param("sweep", c.sweep().name()).param("grid", format!("{grid:?}"));
    match c.sa_scheme()? {
        None => {
            let preset: CsaPreset = c.preset.parse()?;
            let rows = predicted_gamma_sweep(preset, c.sweep(), &grid, c.theta)?;
            let mut w = create(&c.out, "prediction.csv", &mut m)?;
            write_prediction_csv(&rows, &mut w)?;
            w.flush()?;
            let su = c.setup()?;
            let cfg = csa_preset(preset, &su)?;
            println!("{preset} at mu = {}, N = {}: c_sigma = {:.4}, D = {:.4}", su.mu(), su.n(), cfg.c_sigma, cfg.effective_damping());
            for r in rows {
                println!("mu = {}, N = {}: gamma = {:.4}", r.setup.mu(), r.setup.n(), r.gamma_pred);
            }
        }
        Some(scheme) => {
            let setups = c.sweep().setups(&grid, c.theta)?;
            let rows = predicted_sa_sweep(scheme, c.tau_rule()?, &setups)?;
            let mut w = create(&c.out, "sa_prediction.csv", &mut m)?;
            write_sa_prediction_csv(&rows, &mut w)?;
            w.flush()?;
            for r in rows {
                let g = r.gamma_pred.map(|g| format!("{g:.4}")).unwrap_or_else(|| "n/a".into());
                println!("mu = {}, N = {}: tau = {:.4}, gamma = {g} [{}]", r.setup.mu(), r.setup.n(), r.tau, r.validity_flag());
            }
        }
    }
    m.write(&c.out)?;
    Ok(())
}

fn instability(c: &Common) -> Result<()> {
    let su = c.setup()?;
    let scheme = c.sa_scheme()?.unwrap_or(SaScheme::Normal);
    let cfg = SaConfig::from_rule(c.tau_rule()?, scheme, su.n())?;
    let stops = c.stops(Stops::default());
    let trials = c.trials.unwrap_or(100);
    let mut m = c.manifest("instability");
    m.param("trials", trials)
        .param("tau", cfg.tau)
        .param("r_stop", stops.r_stop)
        .param("sigma_stop", stops.sigma_stop)
        .param("g_max", stops.g_max);
    let rep = instability_scan(&su, &cfg, trials, stops, c.seed)?;
    let mut w = create(&c.out, "instability.csv", &mut m)?;
    writeln!(w, "trial,stop_reason")?;
    for (t, r) in rep.per_trial.iter().enumerate() {
        writeln!(w, "{t},{r}")?;
    }
    w.flush()?;
    println!("{scheme}: unstable fraction {:.3} over {trials} trials", rep.unstable_fraction);
    m.write(&c.out)?;
    Ok(())
}

fn figure(tag: &str, c: &Common) -> Result<()> {
    let tag: FigureTag = tag.parse()?;
    let ov = FigureOverrides {
        trials: c.trials,
        phi_trials: None,
        points: c.points,
        grid: c.grid.clone(),
        g_cap: c.g_max,
        mu: None,
        lambda: c.lambda,
        n: None,
    };
    for p in figure_data(tag, &ov, c.seed, &c.out)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (common, job): (&Common, Box<dyn FnOnce(&Common) -> Result<()> + Send>) = match &cli.command {
        Command::Dynamics(c) => (c, Box::new(dynamics)),
        Command::OneGenPhi(c) => (c, Box::new(one_gen_phi)),
        Command::MeasureGamma(c) => (c, Box::new(cmd_measure_gamma)),
        Command::Iterate(c) => (c, Box::new(iterate)),
        Command::Predict(c) => (c, Box::new(predict)),
        Command::Instability(c) => (c, Box::new(instability)),
        Command::Figure { tag, common } => {
            let tag = tag.clone();
            (common, Box::new(move |c: &Common| figure(&tag, c)))
        }
    };
    let c = common.clone();
    with_threads(common.threads, move || job(&c))?
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
