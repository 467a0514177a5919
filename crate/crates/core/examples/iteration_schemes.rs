// Fixed points of the four expected-value iterations of CSA for
// `mu = 1000`, `lambda = 2000`, `N = 100`.

use sphere_es::csa_steady_state::{closed_form_gamma, iterate_scheme, preset_rule_v1, trajectory, IterationScheme};
use sphere_es::es::CsaPreset;
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let setup = PopulationSetup::with_ratio(1000, 0.5, 100)?;
    let cfg = preset_rule_v1(CsaPreset::SqrtN, &setup)?;
    for scheme in IterationScheme::ALL {
        let r = iterate_scheme(scheme, &setup, &cfg)?;
        println!(
            "{scheme}: sigma*_ss = {:8.3}  sigma*_0 = {:8.3}  gamma = {:.4}  ({} iterations)",
            r.sigma_ss, r.sigma_zero_ref, r.gamma, r.state.g
        );
    }
    println!("closed form: gamma = {:.4}", closed_form_gamma(&cfg, &setup)?);

    println!("\nfirst iterates of 1A:");
    for st in trajectory(IterationScheme::It1A, &setup, &cfg, 40).iter().step_by(8) {
        println!("  g = {:<3} ||s||^2 = {:8.3}  s_A = {:7.3}  sigma* = {:.3}", st.g, st.s_norm_sq, st.s_a, st.sigma_star);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
