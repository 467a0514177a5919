// Steady state of σSA from the progress / self-adaptation balance and the
// headline `tau <-> gamma` relation.

use sphere_es::es::{SaScheme, TauRule};
use sphere_es::sa_steady_state::{gamma_from_tau, gamma_implied, sigma_ss_sa, tau_from_gamma, SarCondition};
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let setup = PopulationSetup::with_ratio(1000, 0.5, 100)?;
    for rule in [TauRule::Sqrt8N, TauRule::Sqrt2N, TauRule::SqrtN] {
        let tau = rule.tau(setup.n());
        print!("tau = 1/{:<7} headline gamma = {:.3}", rule.name(), gamma_from_tau(tau, setup.n())?);
        for scheme in [SaScheme::LogNormal, SaScheme::Normal] {
            let cond = SarCondition::new(scheme, setup, tau)?;
            match sigma_ss_sa(&cond) {
                Ok(s) => print!("  {scheme}: sigma*_ss = {s:.2} (gamma {:.3})", gamma_implied(&cond)?),
                Err(e) => print!("  {scheme}: {e}"),
            }
        }
        println!();
    }
    println!("tau for gamma = 0.8 at N = 100: {:.4}", tau_from_gamma(0.8, 100)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
