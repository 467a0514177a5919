// σSA-ES runs with log-normal and normal mutation-strength sampling, with
// the trace of one run written as CSV to stdout.

use sphere_es::es::{run_dynamics, Adaptation, Init, SaConfig, SaScheme, Stops, TauRule};
use sphere_es::rng::StreamKey;
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let setup = PopulationSetup::new(10, 20, 30)?;
    for scheme in [SaScheme::LogNormal, SaScheme::Normal] {
        let cfg = SaConfig::from_rule(TauRule::Sqrt2N, scheme, setup.n())?;
        let trace = run_dynamics(
            &setup,
            &Adaptation::Sa(cfg),
            Init::default(),
            Stops::default(),
            &StreamKey::from_seed(7),
        )?;
        println!("{scheme}: tau = {:.4}, {} after {} generations", cfg.tau, trace.stop_reason, trace.last().g);
        if scheme == SaScheme::LogNormal {
            let mut csv = Vec::new();
            trace.write_csv(&mut csv)?;
            let text = String::from_utf8(csv).expect("CSV is ASCII");
            for line in text.lines().take(4) {
                println!("  {line}");
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
