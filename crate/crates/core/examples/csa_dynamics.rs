// A CSA-ES run on the sphere for each standard preset.

use sphere_es::es::{csa_preset, run_dynamics, Adaptation, CsaPreset, Init, Stops};
use sphere_es::rng::StreamKey;
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let setup = PopulationSetup::new(10, 20, 30)?;
    for preset in CsaPreset::STANDARD {
        let cfg = csa_preset(preset, &setup)?;
        let trace = run_dynamics(
            &setup,
            &Adaptation::Csa(cfg),
            Init::default(),
            Stops::default(),
            &StreamKey::from_seed(42),
        )?;
        let last = trace.last();
        println!(
            "{preset:<12} c_sigma = {:.3}  D = {:<7.3} {} after {} generations, sigma* = {:.3}",
            cfg.c_sigma,
            cfg.effective_damping(),
            trace.stop_reason,
            last.g,
            last.sigma_star
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
