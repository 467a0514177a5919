//! Executable CSA-ES and σSA-ES on the sphere `f(y) = ||y||^2`.

mod config;
mod dynamics;
mod generation;

pub use config::{CsaConfig, CsaPreset, CsaRule, SaConfig, SaScheme, TauRule};
pub use config::{csa_preset, default_cma_damping_asymptote, effective_damping_default_cma};
pub use dynamics::{run_dynamics, Adaptation, GenerationTrace, Init, StopReason, Stops, TraceRow};
pub use generation::{
    csa_generation, plain_generation, sa_generation, Selection, SphereRunState,
};
