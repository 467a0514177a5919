// Measured steady-state `gamma` of CSA and σSA next to the predictions.

use sphere_es::csa_steady_state::{closed_form_gamma, preset_rule_v1};
use sphere_es::es::{CsaPreset, SaScheme, TauRule};
use sphere_es::harness::{measure_gamma, Family, SweepSpec, Window};
use sphere_es::sa_steady_state::gamma_from_tau;
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let grid = vec![PopulationSetup::with_ratio(20, 0.5, 100)?, PopulationSetup::with_ratio(50, 0.5, 100)?];
    for family in [Family::Csa(CsaPreset::SqrtN), Family::Sa(SaScheme::LogNormal, TauRule::Sqrt2N)] {
        let spec = SweepSpec {
            window: Window::Adaptive { r_end: 1e-6, g_cap: 10_000 },
            ..SweepSpec::new(family, grid.clone(), 5, 1)
        };
        for r in measure_gamma(&spec)? {
            let predicted = match family {
                Family::Csa(p) => closed_form_gamma(&preset_rule_v1(p, &r.setup)?, &r.setup)?,
                Family::Sa(_, rule) => gamma_from_tau(rule.tau(r.setup.n()), r.setup.n())?,
            };
            println!(
                "{:<18} mu = {:<3} gamma measured {:.3} (spread {:.3}), predicted {predicted:.3}, phi* = {:.3}",
                family.variant(),
                r.setup.mu(),
                r.gamma.unwrap_or(f64::NAN),
                r.gamma_spread.unwrap_or(f64::NAN),
                r.phi_meas.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
