// Data files, plot script and manifest for two figures, with reduced
// trial counts. Pass an output directory as the first argument.

use std::path::PathBuf;

use sphere_es::harness::{figure_data, FigureOverrides, FigureTag};

pub fn run_in(dir: PathBuf) -> sphere_es::Result<()> {
    let quick = FigureOverrides { trials: Some(2), phi_trials: Some(200), points: Some(5), g_cap: Some(300), ..Default::default() };
    for tag in [FigureTag::Fig3, FigureTag::Fig1] {
        for path in figure_data(tag, &quick, 1, &dir.join(tag.name()))? {
            println!("{}", path.display());
        }
    }
    Ok(())
}

pub fn run_example() -> sphere_es::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("sphere-es-figures"));
    run_in(dir)
}

#[allow(dead_code)]
fn main() -> sphere_es::Result<()> {
    run_example()
}
