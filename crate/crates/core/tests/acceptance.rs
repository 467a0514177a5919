//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use sphere_es::coefficients::{generalized_coefficients, mc_selection_moments_for, ProgressCoefficients, TruncationRatio};
use sphere_es::csa_steady_state::{
    b_from_gamma, closed_form_gamma, gamma_of_b, iterate_scheme, preset_rule_v1, ClosedFormInputs,
    IterationScheme,
};
use sphere_es::es::{
    csa_generation, csa_preset, Adaptation, CsaPreset, Init, SaConfig, SaScheme, Selection,
    SphereRunState, Stops, TauRule,
};
use sphere_es::harness::{
    convergence_fingerprint, dynamics_trials, figure_data, measure_gamma, one_generation_phi, panels,
    with_threads, Family, FigureOverrides, FigureTag, SweepSpec, FIG1_STOPS,
};
use sphere_es::rng::StreamKey;
use sphere_es::sa_steady_state::{gamma_from_tau, tau_from_gamma};
use sphere_es::sphere_theory::{phi_full, sigma_zero_numeric};
use sphere_es::PopulationSetup;

type Outcome = sphere_es::Result<(bool, String)>;

fn within(x: f64, centre: f64, tol: f64) -> bool {
    (x - centre).abs() <= tol
}

fn in_range(x: Option<f64>, lo: f64, hi: f64) -> bool {
    x.is_some_and(|x| (lo..=hi).contains(&x))
}

fn c1_iteration_1a() -> Outcome {
    let setup = PopulationSetup::with_ratio(1000, 0.5, 100)?;
    let cfg = preset_rule_v1(CsaPreset::SqrtN, &setup)?;
    let r = iterate_scheme(IterationScheme::It1A, &setup, &cfg)?;
    let zero = sigma_zero_numeric(&setup)?;
    let ok = within(r.sigma_ss, 135.51, 1.5) && within(r.gamma, 0.88, 0.01) && within(zero, 154.5, 0.5);
    Ok((ok, format!("sigma*_ss = {:.3}, gamma = {:.4}, sigma*_0 = {zero:.3}", r.sigma_ss, r.gamma)))
}

fn c2_closed_form_headline() -> Outcome {
    let gamma_at = |theta: f64| -> sphere_es::Result<f64> {
        let c = ProgressCoefficients::new(TruncationRatio::new(theta)?).c_theta;
        gamma_of_b(1.0 / (1.0 + 2f64.sqrt() * c))
    };
    let g2 = gamma_at(0.5)?;
    let g4 = gamma_at(0.25)?;
    let ok = (0.89..=0.91).contains(&g2) && (0.91..=0.93).contains(&g4);
    Ok((ok, format!("theta = 1/2: {g2:.4}, theta = 1/4: {g4:.4}")))
}

fn c3_oracle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut points = 0;
    for (_, sweep, grid) in panels(&FigureOverrides::default()) {
        for setup in sweep.setups(&grid, 0.5)? {
            for preset in CsaPreset::STANDARD {
                let cfg = preset_rule_v1(preset, &setup)?;
                let it = iterate_scheme(IterationScheme::It2B, &setup, &cfg)?;
                worst = worst.max((it.gamma - closed_form_gamma(&cfg, &setup)?).abs());
                points += 1;
            }
        }
    }
    Ok((worst < 1e-6, format!("max |gamma_2B - closed form| = {worst:.2e} over {points} points")))
}

fn c4_csa_simulation() -> Outcome {
    let grid = [100, 300, 1000]
        .into_iter()
        .map(|mu| PopulationSetup::with_ratio(mu, 0.5, 100))
        .collect::<sphere_es::Result<Vec<_>>>()?;
    let reports = measure_gamma(&SweepSpec::new(Family::Csa(CsaPreset::SqrtN), grid, 10, 1))?;
    let ok = reports.iter().all(|r| in_range(r.gamma, 0.85, 0.95));
    let detail: Vec<String> = reports
        .iter()
        .map(|r| format!("mu = {}: {:.4}", r.setup.mu(), r.gamma.unwrap_or(f64::NAN)))
        .collect();
    Ok((ok, detail.join(", ")))
}

fn c5_sa_simulation() -> Outcome {
    let setup = PopulationSetup::with_ratio(1000, 0.5, 100)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (rule, centre, tol) in [(TauRule::Sqrt2N, 0.71, 0.10), (TauRule::Sqrt8N, 0.94, 0.05)] {
        let family = Family::Sa(SaScheme::LogNormal, rule);
        let r = &measure_gamma(&SweepSpec::new(family, vec![setup], 10, 1))?[0];
        ok &= in_range(r.gamma, centre - tol, centre + tol);
        detail.push(format!("tau = 1/{}: {:.4}", rule.name(), r.gamma.unwrap_or(f64::NAN)));
    }
    Ok((ok, detail.join(", ")))
}

fn c6_one_generation() -> Outcome {
    let mut worst = 0.0f64;
    for mu in [100, 1000] {
        let setup = PopulationSetup::with_ratio(mu, 0.5, 100)?;
        let zero = sigma_zero_numeric(&setup)?;
        for k in 1..=10 {
            let s = zero * k as f64 / 10.0;
            let est = one_generation_phi(s, &setup, None, 10_000, 1)?;
            worst = worst.max((est.mean - phi_full(s, &setup)).abs() / est.std_err);
        }
    }
    Ok((worst <= 3.0, format!("largest deviation {worst:.2} standard errors over 20 points")))
}

fn c7_fingerprints() -> Outcome {
    let setup = PopulationSetup::new(100, 200, 100)?;
    let expected = [(2.3, 0.4), (0.7, 0.2), (3.5, 0.6), (1.1, 0.3)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (i, (centre, tol)) in expected.into_iter().enumerate() {
        let (fp, _) = convergence_fingerprint(&setup, i, 10, FIG1_STOPS, 1)?;
        ok &= in_range(fp.phi_meas_median, centre - tol, centre + tol);
        detail.push(format!("{}: {:.3}", fp.config, fp.phi_meas_median.unwrap_or(f64::NAN)));
    }
    Ok((ok, detail.join(", ")))
}

fn c8_instability() -> Outcome {
    let setup = PopulationSetup::new(10, 20, 100)?;
    let scan = |scheme| -> sphere_es::Result<f64> {
        let cfg = SaConfig::from_rule(TauRule::SqrtN, scheme, 100)?;
        Ok(sphere_es::harness::instability_scan(&setup, &cfg, 100, Stops::default(), 1)?.unstable_fraction)
    };
    let saep = scan(SaScheme::Normal)?;
    let saln = scan(SaScheme::LogNormal)?;
    let ok = (0.01..=0.20).contains(&saep) && saln == 0.0;
    Ok((ok, format!("saep {:.0}/100 unstable, saln {:.0}/100", saep * 100.0, saln * 100.0)))
}

fn c9_properties() -> Outcome {
    let mut failures = Vec::new();

    let mut worst_b = 0.0f64;
    let mut worst_x = 0.0f64;
    for i in 1..200 {
        let b = 0.05 * i as f64;
        let g = gamma_of_b(b)?;
        worst_b = worst_b.max((b_from_gamma(g)? - b).abs() / b.max(1.0));
        let x = ClosedFormInputs { a: 1.0, b }.x();
        worst_x = worst_x.max(((x - 1.0).powi(2) + 2.0 * b * (x - 1.0) - 1.0).abs());
    }
    if worst_b > 1e-12 {
        failures.push(format!("gamma <-> b {worst_b:.1e}"));
    }
    if worst_x > 1e-12 {
        failures.push(format!("x root {worst_x:.1e}"));
    }

    let mut worst_t = 0.0f64;
    for n in [10, 100, 1000] {
        for i in 1..100 {
            let g = i as f64 / 100.0;
            worst_t = worst_t.max((gamma_from_tau(tau_from_gamma(g, n)?, n)? - g).abs());
        }
    }
    if worst_t > 1e-12 {
        failures.push(format!("tau <-> gamma {worst_t:.1e}"));
    }

    let setup = PopulationSetup::new(10, 20, 100)?;
    let cfg = csa_preset(CsaPreset::SqrtN, &setup)?;
    let key = StreamKey::from_seed(1);
    let mut st = SphereRunState::initial(100, 1.0, 1.0)?;
    let mut acc = 0.0;
    let (burn, gens) = (200, 10_000);
    for g in 0..burn + gens {
        st = csa_generation(&st, &setup, &cfg, &key, Selection::Random)?;
        if g >= burn {
            acc += st.path_norm().powi(2);
        }
    }
    let mean_sq = acc / gens as f64;
    if !within(mean_sq, 100.0, 5.0) {
        failures.push(format!("random-selection E||s||^2 = {mean_sq:.2}"));
    }

    let mut worst_mc = 0.0f64;
    for t in [0.1, 0.25, 0.5] {
        let theta = TruncationRatio::new(t)?;
        let (e11, e20) = generalized_coefficients(theta);
        let c = ProgressCoefficients::new(theta).c_theta;
        let m = mc_selection_moments_for(theta, 4000, 4000, 2)?;
        let m11 = m.m11()?;
        for (est, exact) in [(m.m1, c), (m.m2, 1.0 + e11), (m11, e20)] {
            worst_mc = worst_mc.max((est.mean - exact).abs() / est.std_err);
        }
    }
    if worst_mc > 3.0 {
        failures.push(format!("coefficient oracle {worst_mc:.2} SE"));
    }

    let overrides = FigureOverrides { trials: Some(2), phi_trials: Some(100), points: Some(3), g_cap: Some(200), ..Default::default() };
    let base = tempfile::tempdir()?;
    let a = base.path().join("a");
    let b = base.path().join("b");
    let files_a = with_threads(Some(1), || figure_data(FigureTag::Fig1, &overrides, 5, &a))??;
    let files_b = with_threads(Some(3), || figure_data(FigureTag::Fig1, &overrides, 5, &b))??;
    let mut identical = files_a.len() == files_b.len();
    for (fa, fb) in files_a.iter().zip(&files_b) {
        identical &= fs::read(fa)? == fs::read(fb)?;
    }
    let sa = SaConfig::from_rule(TauRule::Sqrt2N, SaScheme::LogNormal, 30)?;
    let su = PopulationSetup::new(8, 16, 30)?;
    let run = || dynamics_trials(&su, &Adaptation::Sa(sa), Init::default(), Stops::default(), 4, &StreamKey::from_seed(3));
    identical &= with_threads(Some(1), run)?? == with_threads(Some(4), run)??;
    if !identical {
        failures.push("reruns differ".to_string());
    }

    let ok = failures.is_empty();
    let detail = if ok {
        format!(
            "roundtrips {worst_b:.1e}/{worst_t:.1e}, x root {worst_x:.1e}, E||s||^2 = {mean_sq:.2}, \
             coefficients within {worst_mc:.2} SE, reruns identical"
        )
    } else {
        failures.join("; ")
    };
    Ok((ok, detail))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("iteration 1A fixed point", c1_iteration_1a),
        ("closed-form headline gamma", c2_closed_form_headline),
        ("iteration 2B equals closed form", c3_oracle_equivalence),
        ("CSA simulation gamma", c4_csa_simulation),
        ("σSA simulation gamma", c5_sa_simulation),
        ("one-generation progress rate", c6_one_generation),
        ("convergence-rate fingerprints", c7_fingerprints),
        ("σSA instability", c8_instability),
        ("property suites", c9_properties),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut all = true;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let k = i + 1;
        if only.is_some_and(|o| o != k) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = check().unwrap_or_else(|e| (false, format!("error: {e}")));
        all &= ok;
        println!(
            "{} {k} {name}: {detail} ({:.1} s)",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
