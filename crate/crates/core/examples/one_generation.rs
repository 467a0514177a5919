// One-generation Monte Carlo progress rate compared with the formula,
// without adaptation and with one σSA generation.

use sphere_es::es::{SaConfig, SaScheme, TauRule};
use sphere_es::harness::{one_generation_phi_with, OneGenerationPlan};
use sphere_es::sphere_theory::{phi_full, sigma_zero_numeric};
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let setup = PopulationSetup::new(20, 40, 50)?;
    let zero = sigma_zero_numeric(&setup)?;
    let sa = SaConfig::from_rule(TauRule::Sqrt2N, SaScheme::LogNormal, setup.n())?;
    let plain = OneGenerationPlan::new(setup, None, 2000, 3);
    let adaptive = OneGenerationPlan::new(setup, Some(sa), 2000, 3);
    println!("sigma*   formula   simulated         with σSA");
    for k in 1..=5 {
        let s = zero * k as f64 / 6.0;
        let a = one_generation_phi_with(&plain, s)?;
        let b = one_generation_phi_with(&adaptive, s)?;
        println!(
            "{s:<8.3} {:<9.4} {:.4} +- {:.4}  {:.4} +- {:.4}",
            phi_full(s, &setup),
            a.mean,
            a.std_err,
            b.mean,
            b.std_err
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
