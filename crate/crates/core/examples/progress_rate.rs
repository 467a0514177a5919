// Sphere progress rate in three approximation orders, its second zero and
// its maximizer.

use sphere_es::sphere_theory::{
    phi_full, phi_large, phi_medium, sigma_opt, sigma_zero_approx, sigma_zero_numeric,
};
use sphere_es::PopulationSetup;

pub fn run_example() -> sphere_es::Result<()> {
    let setup = PopulationSetup::with_ratio(1000, 0.5, 100)?;
    let zero = sigma_zero_numeric(&setup)?;
    println!("mu = 1000, lambda = 2000, N = 100");
    println!("sigma*_0 = {zero:.3}  (large-population approximation {:.3})", sigma_zero_approx(&setup));
    println!("argmax phi* = {:.3}", sigma_opt(&setup)?);
    println!();
    println!("sigma*    full      medium    large");
    for k in 1..=8 {
        let s = zero * k as f64 / 8.0;
        println!(
            "{s:<9.2} {:<9.4} {:<9.4} {:.4}",
            phi_full(s, &setup),
            phi_medium(s, &setup),
            phi_large(s, &setup)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
