// Closed-form `gamma` of the three CSA presets as `mu` and `N` vary.

use sphere_es::csa_steady_state::{b_from_gamma, predicted_gamma_sweep, write_prediction_csv, Sweep, DEFAULT_GRID};
use sphere_es::es::CsaPreset;

pub fn run_example() -> sphere_es::Result<()> {
    for (label, sweep, grid) in [
        ("N = 100, varying mu", Sweep::VaryMu { n: 100 }, DEFAULT_GRID.to_vec()),
        ("mu = 1000, varying N", Sweep::VaryN { mu: 1000 }, vec![10, 30, 100, 300, 1000]),
    ] {
        println!("{label}");
        for preset in CsaPreset::STANDARD {
            let rows = predicted_gamma_sweep(preset, sweep, &grid, 0.5)?;
            let gammas: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.gamma_pred)).collect();
            println!("  {preset:<12} {}", gammas.join("  "));
        }
    }
    println!("b for gamma = 0.9: {:.4}", b_from_gamma(0.9)?);

    let rows = predicted_gamma_sweep(CsaPreset::SqrtN, Sweep::MuTwiceN, &[50, 500], 0.5)?;
    write_prediction_csv(&rows, std::io::stdout().lock())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
