//! Monte Carlo measurement protocols: one-generation progress rates,
//! steady-state `gamma` sweeps, instability statistics and figure data.
//!
//! Every trial draws from a stream keyed by the master seed and the
//! trial's coordinates (grid point, trial index), never by its position in
//! a work queue, so results do not depend on the thread count.

mod figures;
mod manifest;
mod one_gen;
mod stats;
mod steady;

pub use figures::{
    convergence_fingerprint, default_trials, fig1_configs, figure_data, FigureOverrides, FigureTag,
    panels, Fingerprint, FIG1_BURN_IN, FIG1_STOPS,
};
pub use manifest::Manifest;
pub use one_gen::{one_generation_phi, one_generation_phi_with, OneGenerationPlan};
pub use stats::median;
pub use steady::{
    dynamics_trials, instability_scan, measure_gamma, measure_phi_from_trace, write_gamma_csv,
    Family, InstabilityReport, RefKind, SteadyStateReport, StopStats, SweepSpec, Window,
    GAMMA_CSV_HEADER,
};

use crate::error::{invalid, Result};

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T, F>(threads: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(invalid("--threads must be at least 1")),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
