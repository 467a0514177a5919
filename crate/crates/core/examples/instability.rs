// Fraction of σSA runs whose mutation strength collapses before the target
// distance is reached, for both sampling schemes.

use sphere_es::es::{SaConfig, SaScheme, Stops, TauRule};
use sphere_es::harness::instability_scan;
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let setup = PopulationSetup::new(5, 10, 30)?;
    for scheme in [SaScheme::LogNormal, SaScheme::Normal] {
        let cfg = SaConfig::from_rule(TauRule::SqrtN, scheme, setup.n())?;
        let rep = instability_scan(&setup, &cfg, 40, Stops::default(), 2)?;
        println!("{scheme}: {:.0}% of 40 runs reached sigma_stop", 100.0 * rep.unstable_fraction);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
