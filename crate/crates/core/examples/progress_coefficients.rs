// Progress coefficients `c_theta`, `e^{1,1}_theta`, `e^{2,0}_theta` and a
// Monte Carlo check against order statistics of standard normals.

use sphere_es::coefficients::{c_theta, generalized_coefficients, mc_selection_moments, TruncationRatio};

pub fn run_example() -> sphere_es::Result<()> {
    println!("theta    c_theta    e11        e20");
    for t in [0.1, 0.25, 0.5, 0.75] {
        let theta = TruncationRatio::new(t)?;
        let (e11, e20) = generalized_coefficients(theta);
        println!("{t:<8} {:<10.6} {e11:<10.6} {e20:.6}", c_theta(theta));
    }

    // Finite populations approach the asymptotic values as lambda grows.
    let theta = TruncationRatio::new(0.25)?;
    for lambda in [20, 200, 2000] {
        let m = mc_selection_moments(lambda / 4, lambda, 2000, 1)?;
        println!(
            "lambda = {lambda:<5} mean of selected = {:.4} +- {:.4}  (c_theta = {:.4})",
            m.m1.mean,
            m.m1.std_err,
            c_theta(theta)
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
