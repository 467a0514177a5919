use rayon::prelude::*;

use crate::coefficients::Estimate;
use crate::error::{invalid, Result};
use crate::es::{plain_generation, sa_generation, SaConfig, Selection, SphereRunState};
use crate::rng::StreamKey;
use crate::sphere_theory::PopulationSetup;

const ONE_GEN_TAG: u64 = 0x6f6e_6567;

/// Trial streams of a one-generation experiment. Evaluating several `sigma*`
/// values with the same plan reuses the same random numbers.
#[derive(Clone, Copy, Debug)]
pub struct OneGenerationPlan {
    pub setup: PopulationSetup,
    pub sa: Option<SaConfig>,
    pub trials: usize,
    key: StreamKey,
}

impl OneGenerationPlan {
    pub fn new(setup: PopulationSetup, sa: Option<SaConfig>, trials: usize, seed: u64) -> Self {
        let key = StreamKey::from_seed(seed).derive(&[
            ONE_GEN_TAG,
            setup.mu() as u64,
            setup.lambda() as u64,
            setup.n() as u64,
        ]);
        Self { setup, sa, trials, key }
    }
}

/// Mean and standard error of `(R(0) - R(1)) N / R(0)` over the plan's
/// trials, each starting from `R(0) = 1` with `sigma = sigma* / N`.
pub fn one_generation_phi_with(plan: &OneGenerationPlan, sigma_star: f64) -> Result<Estimate> {
    if plan.trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let n = plan.setup.n();
    let start = SphereRunState::initial(n, 1.0, sigma_star)?;
    let samples = (0..plan.trials)
        .into_par_iter()
        .map(|t| {
            let key = plan.key.derive(&[t as u64]);
            let next = match &plan.sa {
                None => plain_generation(&start, &plan.setup, &key, Selection::Fitness)?,
                Some(cfg) => sa_generation(&start, &plan.setup, cfg, &key, Selection::Fitness)?,
            };
            Ok((1.0 - next.r()) * n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&samples))
}

/// One-generation progress rate at `sigma*`; without `sa` the step size is
/// held fixed, with `sa` one σSA generation is executed.
pub fn one_generation_phi(
    sigma_star: f64,
    setup: &PopulationSetup,
    sa: Option<&SaConfig>,
    trials: usize,
    seed: u64,
) -> Result<Estimate> {
    let plan = OneGenerationPlan::new(*setup, sa.copied(), trials, seed);
    one_generation_phi_with(&plan, sigma_star)
}
