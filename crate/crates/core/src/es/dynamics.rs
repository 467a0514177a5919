//! Multi-generation runs with stop criteria and per-generation traces.

use std::fmt;
use std::io::Write;

use super::config::{CsaConfig, SaConfig};
use super::generation::{csa_generation, sa_generation, Selection, SphereRunState};
use crate::error::Result;
use crate::rng::StreamKey;
use crate::sphere_theory::PopulationSetup;
use crate::table::{num, opt_num};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Adaptation {
    Csa(CsaConfig),
    Sa(SaConfig),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Init {
    pub r0: f64,
    pub sigma_star0: f64,
}

impl Default for Init {
    fn default() -> Self {
        Self { r0: 1.0, sigma_star0: 1.0 }
    }
}

/// Stop criteria. A threshold of zero disables the corresponding test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stops {
    pub r_stop: f64,
    pub sigma_stop: f64,
    pub g_max: u64,
}

impl Stops {
    /// `R_stop = 1e-3 r0`, `sigma_stop = 1e-10 r0`, `g_max = 10^6`. The
    /// budget is a safeguard; slowly collapsing σSA runs can take tens of
    /// thousands of generations to reach `sigma_stop`.
    pub fn relative_to(r0: f64) -> Self {
        Self { r_stop: 1e-3 * r0, sigma_stop: 1e-10 * r0, g_max: 1_000_000 }
    }
}

impl Default for Stops {
    fn default() -> Self {
        Self::relative_to(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopReason {
    /// `R < R_stop`.
    Converged,
    /// `sigma < sigma_stop` before `R < R_stop`.
    Unstable,
    /// Generation budget exhausted.
    Budget,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::Unstable => "unstable",
            StopReason::Budget => "budget",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub g: u64,
    pub r: f64,
    pub sigma: f64,
    pub sigma_star: f64,
    pub path_norm: Option<f64>,
}

impl TraceRow {
    fn of(state: &SphereRunState, csa: bool) -> Self {
        let r = state.r();
        Self {
            g: state.g,
            r,
            sigma: state.sigma,
            sigma_star: state.sigma * state.n() as f64 / r,
            path_norm: csa.then(|| state.path_norm()),
        }
    }
}

/// Every generation of a run, starting with `g = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GenerationTrace {
    pub n: usize,
    pub rows: Vec<TraceRow>,
    pub stop_reason: StopReason,
}

impl GenerationTrace {
    pub const CSV_HEADER: &'static str = "g,R,sigma,sigma_star,path_norm,stop_reason";

    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("a trace holds at least the initial row")
    }

    /// Writes the trace as CSV; `stop_reason` is filled on the final row only.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        let last = self.rows.len() - 1;
        for (i, row) in self.rows.iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.g,
                num(row.r),
                num(row.sigma),
                num(row.sigma_star),
                opt_num(row.path_norm),
                if i == last { self.stop_reason.name() } else { "" }
            )?;
        }
        Ok(())
    }
}

fn check_stops(state: &SphereRunState, stops: &Stops) -> Option<StopReason> {
    if stops.r_stop > 0.0 && state.r() < stops.r_stop {
        Some(StopReason::Converged)
    } else if stops.sigma_stop > 0.0 && state.sigma < stops.sigma_stop {
        Some(StopReason::Unstable)
    } else if state.g >= stops.g_max {
        Some(StopReason::Budget)
    } else {
        None
    }
}

/// Runs the ES from `y = r0 e_1`, `sigma = sigma*_0 r0 / N`, `s = 0` until a
/// stop criterion fires. Both criteria are tested after every generation;
/// reaching `R_stop` takes precedence when both hold at once.
pub fn run_dynamics(
    setup: &PopulationSetup,
    adaptation: &Adaptation,
    init: Init,
    stops: Stops,
    key: &StreamKey,
) -> Result<GenerationTrace> {
    let csa = matches!(adaptation, Adaptation::Csa(_));
    let mut state = SphereRunState::initial(setup.n(), init.r0, init.sigma_star0)?;
    let mut rows = vec![TraceRow::of(&state, csa)];
    let stop_reason = loop {
        if let Some(reason) = check_stops(&state, &stops) {
            break reason;
        }
        state = match adaptation {
            Adaptation::Csa(cfg) => csa_generation(&state, setup, cfg, key, Selection::Fitness)?,
            Adaptation::Sa(cfg) => sa_generation(&state, setup, cfg, key, Selection::Fitness)?,
        };
        rows.push(TraceRow::of(&state, csa));
    };
    Ok(GenerationTrace { n: setup.n(), rows, stop_reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::es::config::{csa_preset, CsaPreset, SaScheme};

    #[test]
    fn trace_rows_are_normalized() {
        let su = PopulationSetup::new(5, 10, 20).unwrap();
        let cfg = csa_preset(CsaPreset::SqrtN, &su).unwrap();
        let stops = Stops { g_max: 50, ..Stops::default() };
        let tr = run_dynamics(&su, &Adaptation::Csa(cfg), Init::default(), stops, &StreamKey::from_seed(3))
            .unwrap();
        assert_eq!(tr.rows[0].g, 0);
        for row in &tr.rows {
            assert_eq!(row.sigma_star, row.sigma * 20.0 / row.r);
            assert!(row.path_norm.is_some());
        }
    }

    #[test]
    fn budget_stop_and_csv() {
        let su = PopulationSetup::new(2, 4, 3).unwrap();
        let cfg = SaConfig::new(0.2, SaScheme::LogNormal).unwrap();
        let stops = Stops { r_stop: 0.0, sigma_stop: 0.0, g_max: 7 };
        let tr = run_dynamics(&su, &Adaptation::Sa(cfg), Init::default(), stops, &StreamKey::from_seed(3))
            .unwrap();
        assert_eq!(tr.stop_reason, StopReason::Budget);
        assert_eq!(tr.rows.len(), 8);
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], GenerationTrace::CSV_HEADER);
        assert_eq!(lines.len(), 9);
        assert!(lines[1].ends_with(",,"));
        assert!(lines[8].ends_with(",,budget"));
        let fields: Vec<&str> = lines[3].split(',').collect();
        assert_eq!(fields[1].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    }

    #[test]
    fn converged_stop() {
        let su = PopulationSetup::new(10, 20, 10).unwrap();
        let cfg = SaConfig::new(TAU, SaScheme::LogNormal).unwrap();
        const TAU: f64 = 0.2;
        let tr = run_dynamics(
            &su,
            &Adaptation::Sa(cfg),
            Init { r0: 1.0, sigma_star0: 3.0 },
            Stops::default(),
            &StreamKey::from_seed(8),
        )
        .unwrap();
        assert_eq!(tr.stop_reason, StopReason::Converged);
        assert!(tr.last().r < 1e-3);
    }
}
