// Offspring draw from keyed random streams, so a run is identical on any
// number of threads.

use sphere_es::es::{csa_preset, run_dynamics, Adaptation, CsaPreset, Init, Stops};
use sphere_es::harness::with_threads;
use sphere_es::rng::StreamKey;
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let setup = PopulationSetup::new(50, 100, 40)?;
    let cfg = csa_preset(CsaPreset::SqrtN, &setup)?;
    let run = || {
        run_dynamics(&setup, &Adaptation::Csa(cfg), Init::default(), Stops::default(), &StreamKey::from_seed(9))
    };
    let one = with_threads(Some(1), run)??;
    let four = with_threads(Some(4), run)??;
    println!("1 thread:  {} generations, R = {:e}", one.last().g, one.last().r);
    println!("4 threads: {} generations, R = {:e}", four.last().g, four.last().r);
    println!("identical: {}", one == four);
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
