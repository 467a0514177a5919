//! One generation of the `(mu/mu_I, lambda)`-ES.
//!
//! Offspring `l` of generation `g` draws all of its randomness from its own
//! stream, so the offspring loop runs in parallel and still reproduces the
//! sequential result bit for bit. Selected offspring are summed in
//! ascending-rank order; ties in fitness are broken by offspring index.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::config::{CsaConfig, SaConfig};
use crate::coefficients::e_chi;
use crate::error::{invalid, Error, Result};
use crate::rng::{generation_stream, offspring_stream, StreamKey};
use crate::sphere_theory::PopulationSetup;

/// How the `mu` parents are chosen from the offspring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    /// The `mu` offspring with the smallest `||y~||^2`.
    #[default]
    Fitness,
    /// A uniformly random `mu`-subset; used to check random-selection baselines.
    Random,
}

/// Parent state of a sphere run.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereRunState {
    pub y: Vec<f64>,
    pub sigma: f64,
    /// Cumulation path; stays zero for σSA.
    pub s: Vec<f64>,
    pub g: u64,
}

impl SphereRunState {
    /// `y = r0 e_1`, `sigma = sigma*_0 r0 / N`, `s = 0`.
    pub fn initial(n: usize, r0: f64, sigma_star0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(invalid(format!("initial distance must be positive, got {r0}")));
        }
        if !(sigma_star0 > 0.0 && sigma_star0.is_finite()) {
            return Err(invalid(format!("initial sigma* must be positive, got {sigma_star0}")));
        }
        if n == 0 {
            return Err(invalid("dimension N must be at least 1"));
        }
        let mut y = vec![0.0; n];
        y[0] = r0;
        Ok(Self { y, sigma: sigma_star0 * r0 / n as f64, s: vec![0.0; n], g: 0 })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Residual distance `R = ||y||`.
    pub fn r(&self) -> f64 {
        norm_sq(&self.y).sqrt()
    }

    pub fn sigma_star(&self) -> f64 {
        self.sigma * self.n() as f64 / self.r()
    }

    pub fn path_norm(&self) -> f64 {
        norm_sq(&self.s).sqrt()
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

struct Offspring {
    z: Vec<f64>,
    sigma: Vec<f64>,
    fitness: Vec<f64>,
}

/// Samples `lambda` offspring. `sample_sigma` maps the parental sigma and a
/// standard normal draw to the offspring mutation strength; `None` means all
/// offspring share the parental sigma and no draw is consumed.
fn sample_offspring(
    state: &SphereRunState,
    lambda: usize,
    key: &StreamKey,
    sample_sigma: Option<&(dyn Fn(f64, f64) -> f64 + Sync)>,
) -> Offspring {
    let n = state.n();
    let mut z = vec![0.0; lambda * n];
    let mut sigma = vec![state.sigma; lambda];
    let mut fitness = vec![0.0; lambda];
    z.par_chunks_mut(n)
        .zip(sigma.par_iter_mut())
        .zip(fitness.par_iter_mut())
        .enumerate()
        .with_min_len(16)
        .for_each(|(l, ((zl, sl), fl))| {
            let mut rng = key.stream(offspring_stream(state.g, l));
            if let Some(f) = sample_sigma {
                *sl = f(state.sigma, StandardNormal.sample(&mut rng));
            }
            let mut f = 0.0;
            for (zi, yi) in zl.iter_mut().zip(&state.y) {
                *zi = StandardNormal.sample(&mut rng);
                let c = yi + *sl * *zi;
                f += c * c;
            }
            *fl = f;
        });
    Offspring { z, sigma, fitness }
}

/// Indices of the `mu` selected offspring in ascending rank order.
fn select(
    off: &Offspring,
    mu: usize,
    g: u64,
    key: &StreamKey,
    selection: Selection,
) -> Result<Vec<usize>> {
    if let Some(l) = off.fitness.iter().position(|f| !f.is_finite()) {
        return Err(Error::NonFiniteFitness { generation: g, offspring: l });
    }
    let mut idx: Vec<usize> = (0..off.fitness.len()).collect();
    match selection {
        Selection::Fitness => {
            idx.sort_unstable_by(|&a, &b| off.fitness[a].total_cmp(&off.fitness[b]).then(a.cmp(&b)));
        }
        Selection::Random => idx.shuffle(&mut key.stream(generation_stream(g))),
    }
    idx.truncate(mu);
    Ok(idx)
}

fn check_state(state: &SphereRunState, setup: &PopulationSetup) -> Result<()> {
    if state.n() != setup.n() || state.s.len() != setup.n() {
        return Err(invalid(format!(
            "state dimension {} does not match setup dimension {}",
            state.n(),
            setup.n()
        )));
    }
    if !(state.sigma > 0.0) {
        return Err(Error::SigmaCollapse { generation: state.g, sigma: state.sigma });
    }
    Ok(())
}

/// Mean of the selected mutation vectors, `z_bar = (1/mu) sum z_{m;lambda}`.
fn mean_mutation(off: &Offspring, chosen: &[usize], n: usize) -> Vec<f64> {
    let mut zbar = vec![0.0; n];
    for &l in chosen {
        for (acc, z) in zbar.iter_mut().zip(&off.z[l * n..(l + 1) * n]) {
            *acc += z;
        }
    }
    let inv = 1.0 / chosen.len() as f64;
    zbar.iter_mut().for_each(|v| *v *= inv);
    zbar
}

/// One generation of the CSA-ES.
pub fn csa_generation(
    state: &SphereRunState,
    setup: &PopulationSetup,
    cfg: &CsaConfig,
    key: &StreamKey,
    selection: Selection,
) -> Result<SphereRunState> {
    check_state(state, setup)?;
    cfg.validate()?;
    let n = setup.n();
    let off = sample_offspring(state, setup.lambda(), key, None);
    let chosen = select(&off, setup.mu(), state.g, key, selection)?;
    let zbar = mean_mutation(&off, &chosen, n);

    let c = cfg.c_sigma;
    let gain = (setup.mu() as f64 * c * (2.0 - c)).sqrt();
    let y: Vec<f64> = state.y.iter().zip(&zbar).map(|(y, z)| y + state.sigma * z).collect();
    let s: Vec<f64> = state.s.iter().zip(&zbar).map(|(s, z)| (1.0 - c) * s + gain * z).collect();
    let sigma = state.sigma * cfg.sigma_factor(norm_sq(&s).sqrt() / e_chi(n));
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::SigmaCollapse { generation: state.g, sigma });
    }
    Ok(SphereRunState { y, sigma, s, g: state.g + 1 })
}

/// One generation of the σSA-ES.
pub fn sa_generation(
    state: &SphereRunState,
    setup: &PopulationSetup,
    cfg: &SaConfig,
    key: &StreamKey,
    selection: Selection,
) -> Result<SphereRunState> {
    check_state(state, setup)?;
    let n = setup.n();
    let sampler = |sigma: f64, xi: f64| cfg.sample_sigma(sigma, xi);
    let off = sample_offspring(state, setup.lambda(), key, Some(&sampler));
    let chosen = select(&off, setup.mu(), state.g, key, selection)?;

    let mut y = state.y.clone();
    let mut sigma_sum = 0.0;
    let inv = 1.0 / setup.mu() as f64;
    for &l in &chosen {
        let sl = off.sigma[l];
        sigma_sum += sl;
        for (yi, z) in y.iter_mut().zip(&off.z[l * n..(l + 1) * n]) {
            *yi += inv * sl * z;
        }
    }
    let sigma = sigma_sum * inv;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::SigmaCollapse { generation: state.g, sigma });
    }
    Ok(SphereRunState { y, sigma, s: state.s.clone(), g: state.g + 1 })
}

/// One generation without mutation-strength adaptation: positions are
/// recombined while sigma and the path stay unchanged.
pub fn plain_generation(
    state: &SphereRunState,
    setup: &PopulationSetup,
    key: &StreamKey,
    selection: Selection,
) -> Result<SphereRunState> {
    check_state(state, setup)?;
    let off = sample_offspring(state, setup.lambda(), key, None);
    let chosen = select(&off, setup.mu(), state.g, key, selection)?;
    let zbar = mean_mutation(&off, &chosen, setup.n());
    let y = state.y.iter().zip(&zbar).map(|(y, z)| y + state.sigma * z).collect();
    Ok(SphereRunState { y, sigma: state.sigma, s: state.s.clone(), g: state.g + 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::es::config::{csa_preset, CsaPreset, CsaRule, SaScheme};

    fn setup(mu: usize, lambda: usize, n: usize) -> PopulationSetup {
        PopulationSetup::new(mu, lambda, n).unwrap()
    }

    #[test]
    fn initial_state() {
        let st = SphereRunState::initial(10, 2.0, 5.0).unwrap();
        assert_eq!(st.r(), 2.0);
        assert_eq!(st.sigma, 1.0);
        assert_eq!(st.sigma_star(), 5.0);
        assert!(st.s.iter().all(|&x| x == 0.0));
        assert!(SphereRunState::initial(10, 0.0, 1.0).is_err());
        assert!(SphereRunState::initial(10, 1.0, -1.0).is_err());
    }

    #[test]
    fn full_cumulation_erases_path_memory() {
        let su = setup(4, 8, 6);
        let cfg = CsaConfig::custom(1.0, 3.0, CsaRule::V1).unwrap();
        let key = StreamKey::from_seed(11);
        let mut st = SphereRunState::initial(6, 1.0, 1.0).unwrap();
        st.s = vec![5.0; 6];
        let next = csa_generation(&st, &su, &cfg, &key, Selection::Fitness).unwrap();
        let zbar: Vec<f64> = next.y.iter().zip(&st.y).map(|(a, b)| (a - b) / st.sigma).collect();
        let expected = 4f64.sqrt() * norm_sq(&zbar).sqrt();
        assert!((next.path_norm() - expected).abs() < 1e-12);
    }

    #[test]
    fn selection_picks_smallest_fitness() {
        let su = setup(3, 10, 5);
        let key = StreamKey::from_seed(5);
        let st = SphereRunState::initial(5, 1.0, 2.0).unwrap();
        let off = sample_offspring(&st, 10, &key, None);
        let chosen = select(&off, 3, 0, &key, Selection::Fitness).unwrap();
        let worst_chosen = chosen.iter().map(|&l| off.fitness[l]).fold(f64::MIN, f64::max);
        for l in (0..10).filter(|l| !chosen.contains(l)) {
            assert!(off.fitness[l] >= worst_chosen);
        }
        let next = plain_generation(&st, &su, &key, Selection::Fitness).unwrap();
        let direct: Vec<f64> = (0..5)
            .map(|i| {
                chosen.iter().map(|&l| st.y[i] + st.sigma * off.z[l * 5 + i]).sum::<f64>() / 3.0
            })
            .collect();
        for (a, b) in next.y.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_tau_keeps_sigma() {
        let su = setup(3, 6, 4);
        let key = StreamKey::from_seed(9);
        let st = SphereRunState::initial(4, 1.0, 1.0).unwrap();
        for scheme in [SaScheme::LogNormal, SaScheme::Normal] {
            let cfg = SaConfig { tau: 0.0, scheme, sigma_floor: 1e-20 };
            let next = sa_generation(&st, &su, &cfg, &key, Selection::Fitness).unwrap();
            assert!((next.sigma - st.sigma).abs() < 1e-16);
        }
    }

    #[test]
    fn nonfinite_fitness_aborts() {
        let su = setup(2, 4, 3);
        let key = StreamKey::from_seed(1);
        let mut st = SphereRunState::initial(3, 1.0, 1.0).unwrap();
        st.sigma = f64::INFINITY;
        let cfg = csa_preset(CsaPreset::SqrtN, &su).unwrap();
        let err = csa_generation(&st, &su, &cfg, &key, Selection::Fitness).unwrap_err();
        assert!(matches!(err, Error::NonFiniteFitness { .. }));
    }

    #[test]
    fn collapsed_sigma_is_rejected() {
        let su = setup(2, 4, 3);
        let key = StreamKey::from_seed(1);
        let mut st = SphereRunState::initial(3, 1.0, 1.0).unwrap();
        st.sigma = 0.0;
        let cfg = SaConfig::new(0.3, SaScheme::Normal).unwrap();
        let err = sa_generation(&st, &su, &cfg, &key, Selection::Fitness).unwrap_err();
        assert!(matches!(err, Error::SigmaCollapse { .. }));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let su = setup(2, 4, 3);
        let st = SphereRunState::initial(5, 1.0, 1.0).unwrap();
        let key = StreamKey::from_seed(1);
        assert!(plain_generation(&st, &su, &key, Selection::Fitness).is_err());
    }
}
