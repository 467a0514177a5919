//! Multi-recombinative `(mu/mu_I, lambda)` evolution strategies on the sphere.
//!
//! The crate pairs two executable mutation-strength adaptation schemes,
//! cumulative step-size adaptation (CSA) and mutative self-adaptation (σSA),
//! with the steady-state theory that predicts where each one settles. The
//! adaptation is characterized by the ratio `gamma = sigma*_ss / sigma*_0`
//! of the realized normalized mutation strength to the second zero of the
//! sphere progress rate.
//!
//! Module map:
//!
//! - [`coefficients`]: normal quantile, progress coefficients, `E_chi`, and
//!   the order-statistics Monte Carlo oracle backing them.
//! - [`sphere_theory`]: progress-rate formulas, their zeros and optimum.
//! - [`es`]: the CSA-ES and σSA-ES generation loops and dynamics runs.
//! - [`csa_steady_state`]: expected-value iteration schemes and closed-form
//!   `gamma` predictions for CSA.
//! - [`sa_steady_state`]: the self-adaptation balance condition and the
//!   `tau <-> gamma` relations.
//! - [`harness`]: Monte Carlo measurement protocols, sweeps and figure data.
//!
//! The `examples/` directory holds one runnable program per capability.

pub mod coefficients;
pub mod csa_steady_state;
mod error;
pub mod es;
pub mod harness;
pub mod rng;
pub mod roots;
pub mod sa_steady_state;
pub mod sphere_theory;
mod table;

pub use error::{Error, Result};
pub use sphere_theory::PopulationSetup;
