//! Steady state of σSA on the sphere from the balance between progress and
//! the self-adaptation response, `phi*(sigma*_ss) = -N psi(sigma*_ss, tau)`,
//! in the large-population limit.

use std::io::Write;

use rayon::prelude::*;

use crate::coefficients::generalized_coefficients;
use crate::error::{domain, invalid, Error, Result};
use crate::es::{SaScheme, TauRule};
use crate::roots::{brent_root, RootTolerance};
use crate::sphere_theory::{sigma_zero_approx, PopulationSetup};
use crate::table::{num, opt_num};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SarCondition {
    pub scheme: SaScheme,
    pub setup: PopulationSetup,
    pub tau: f64,
}

impl SarCondition {
    pub fn new(scheme: SaScheme, setup: PopulationSetup, tau: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(invalid(format!("tau must be finite and non-negative, got {tau}")));
        }
        Ok(Self { scheme, setup, tau })
    }

    /// Constant bias of the response: `1/2` for log-normal sampling, `0` for normal.
    pub fn bias(&self) -> f64 {
        match self.scheme {
            SaScheme::LogNormal => 0.5,
            SaScheme::Normal => 0.0,
        }
    }

    fn a(&self) -> f64 {
        self.setup.c_theta() * (2.0 * self.setup.n() as f64).sqrt()
    }

    /// Large-population response `psi = tau^2 (B - c_theta sqrt(2N) + 2 e^{1,1})`
    /// at the steady state.
    pub fn psi(&self) -> f64 {
        let (e11, _) = generalized_coefficients(self.setup.theta());
        self.tau * self.tau * (self.bias() - self.a() + 2.0 * e11)
    }
}

/// `phi*_large(sigma*) + N psi`; zero at the steady state.
pub fn sar_balance_residual(sigma_star: f64, cond: &SarCondition) -> f64 {
    let mu = cond.setup.mu() as f64;
    let n = cond.setup.n() as f64;
    cond.a() - sigma_star * sigma_star / (2.0 * mu) + n * cond.psi()
}

/// Positive root of [`sar_balance_residual`].
pub fn sigma_ss_sa(cond: &SarCondition) -> Result<f64> {
    let at_zero = sar_balance_residual(0.0, cond);
    if !(at_zero > 0.0) {
        return Err(Error::NoSteadyState(format!(
            "tau = {} gives phi* + N psi = {at_zero:.6e} at sigma* = 0",
            cond.tau
        )));
    }
    let mu = cond.setup.mu() as f64;
    let hi = 2.0 * (2.0 * mu * at_zero).sqrt();
    let tol = RootTolerance { f_abs: 0.0, x_rel: 1e-13, max_iter: 300 };
    brent_root(|s| sar_balance_residual(s, cond), 0.0, hi, tol)
}

/// `sigma_ss_sa / sigma_zero_approx`.
pub fn gamma_implied(cond: &SarCondition) -> Result<f64> {
    Ok(sigma_ss_sa(cond)? / sigma_zero_approx(&cond.setup))
}

/// `sqrt((1 - gamma^2) / N)`.
pub fn tau_from_gamma(gamma: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(domain(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    Ok(((1.0 - gamma * gamma) / n as f64).sqrt())
}

/// `sqrt(1 - N tau^2)`.
pub fn gamma_from_tau(tau: f64, n: usize) -> Result<f64> {
    let nt2 = n as f64 * tau * tau;
    if !(tau >= 0.0) || nt2 > 1.0 {
        return Err(domain(format!("need 0 <= N tau^2 <= 1, got {nt2}")));
    }
    Ok((1.0 - nt2).sqrt())
}

/// Rows with a headline `gamma` below this are flagged as outside the
/// model's validity.
pub const LOW_GAMMA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaPredictionRow {
    pub scheme: SaScheme,
    pub tau_rule: TauRule,
    pub setup: PopulationSetup,
    pub tau: f64,
    pub gamma_pred: Option<f64>,
    pub sigma_ss_pred: Option<f64>,
}

impl SaPredictionRow {
    pub fn compute(scheme: SaScheme, tau_rule: TauRule, setup: PopulationSetup) -> Result<Self> {
        let tau = tau_rule.tau(setup.n());
        let cond = SarCondition::new(scheme, setup, tau)?;
        Ok(Self {
            scheme,
            tau_rule,
            setup,
            tau,
            gamma_pred: gamma_from_tau(tau, setup.n()).ok(),
            sigma_ss_pred: sigma_ss_sa(&cond).ok(),
        })
    }

    pub fn validity_flag(&self) -> &'static str {
        match (self.gamma_pred, self.sigma_ss_pred) {
            (_, None) => "no-steady-state",
            (Some(g), _) if g >= LOW_GAMMA => "ok",
            _ => "low-gamma",
        }
    }
}

pub const SA_PREDICTION_CSV_HEADER: &str =
    "scheme,tau_rule,mu,lambda,N,tau,gamma_pred,sigma_ss_pred,validity_flag";

pub fn predicted_sa_sweep(
    scheme: SaScheme,
    tau_rule: TauRule,
    setups: &[PopulationSetup],
) -> Result<Vec<SaPredictionRow>> {
    if setups.is_empty() {
        return Err(invalid("sweep grid is empty"));
    }
    setups.par_iter().map(|&su| SaPredictionRow::compute(scheme, tau_rule, su)).collect()
}

pub fn write_sa_prediction_csv<W: Write>(rows: &[SaPredictionRow], mut w: W) -> Result<()> {
    writeln!(w, "{SA_PREDICTION_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.tau_rule.name(),
            r.setup.mu(),
            r.setup.lambda(),
            r.setup.n(),
            num(r.tau),
            opt_num(r.gamma_pred),
            opt_num(r.sigma_ss_pred),
            r.validity_flag()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cond(scheme: SaScheme, mu: usize, n: usize, tau: f64) -> SarCondition {
        SarCondition::new(scheme, PopulationSetup::with_ratio(mu, 0.5, n).unwrap(), tau).unwrap()
    }

    #[test]
    fn zero_tau_gives_large_population_zero() {
        for scheme in [SaScheme::LogNormal, SaScheme::Normal] {
            let c = cond(scheme, 1000, 100, 0.0);
            let z = sigma_zero_approx(&c.setup);
            assert!((sigma_ss_sa(&c).unwrap() - z).abs() < 1e-10 * z);
        }
    }

    #[test]
    fn root_matches_rearrangement() {
        for tau in [0.01, 0.05, 1.0 / 200f64.sqrt()] {
            let c = cond(SaScheme::LogNormal, 1000, 100, tau);
            let (mu, n) = (1000.0, 100.0f64);
            let a = c.setup.c_theta() * (2.0 * n).sqrt();
            let nt2 = n * tau * tau;
            let s2 = 2.0 * mu * (a * (1.0 - nt2) + nt2 / 2.0);
            assert!(sar_balance_residual(s2.sqrt(), &c).abs() < 1e-12);
            let root = sigma_ss_sa(&c).unwrap();
            assert!((root - s2.sqrt()).abs() < 1e-10 * root);
        }
    }

    #[test]
    fn psi_negative() {
        for n in [10, 100, 1000] {
            for scheme in [SaScheme::LogNormal, SaScheme::Normal] {
                assert!(cond(scheme, 100, n, 0.1).psi() < 0.0);
            }
        }
    }

    #[test]
    fn scheme_ordering_and_gap() {
        let tau = 1.0 / 200f64.sqrt();
        let ln = sigma_ss_sa(&cond(SaScheme::LogNormal, 1000, 100, tau)).unwrap();
        let ep = sigma_ss_sa(&cond(SaScheme::Normal, 1000, 100, tau)).unwrap();
        assert!(ln > ep);
        let gap = |tau: f64| {
            let ln = sigma_ss_sa(&cond(SaScheme::LogNormal, 1000, 100, tau)).unwrap();
            let ep = sigma_ss_sa(&cond(SaScheme::Normal, 1000, 100, tau)).unwrap();
            (ln - ep) / ln
        };
        assert!(gap(1e-3) < 1e-5 && gap(1e-4) < gap(1e-3));
    }

    #[test]
    fn decreasing_in_tau() {
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let tau = i as f64 * 0.005;
            let v = sigma_ss_sa(&cond(SaScheme::LogNormal, 1000, 100, tau)).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn no_steady_state_for_large_tau() {
        let c = cond(SaScheme::Normal, 10, 100, 0.5);
        assert!(matches!(sigma_ss_sa(&c), Err(Error::NoSteadyState(_))));
    }

    #[test]
    fn large_n_consistency() {
        let n = 10_000;
        let tau = 1.0 / (2.0 * n as f64).sqrt();
        let g = gamma_implied(&cond(SaScheme::LogNormal, 1000, n, tau)).unwrap();
        let h = gamma_from_tau(tau, n).unwrap();
        assert!((g - h).abs() / h < 0.02);
    }

    #[test]
    fn tau_gamma_pair() {
        let n = 100;
        assert!((tau_from_gamma(0.0, n).unwrap() - 0.1).abs() < 1e-15);
        assert!((gamma_from_tau(1.0 / 200f64.sqrt(), n).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((gamma_from_tau(1.0 / 800f64.sqrt(), n).unwrap() - 0.875f64.sqrt()).abs() < 1e-12);
        assert!(gamma_from_tau(0.1, n).unwrap().abs() < 1e-7);
        assert!(gamma_from_tau(0.11, n).is_err());
        assert!(tau_from_gamma(1.0, n).is_err());
        for g in [0.0, 0.3, 0.71, 0.94, 0.999] {
            let back = gamma_from_tau(tau_from_gamma(g, n).unwrap(), n).unwrap();
            assert!((back - g).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_flags() {
        let setups: Vec<_> =
            [10, 100, 1000].iter().map(|&mu| PopulationSetup::with_ratio(mu, 0.5, 100).unwrap()).collect();
        let rows = predicted_sa_sweep(SaScheme::LogNormal, TauRule::SqrtN, &setups).unwrap();
        assert!(rows.iter().all(|r| r.validity_flag() != "ok"));
        let rows = predicted_sa_sweep(SaScheme::LogNormal, TauRule::Sqrt8N, &setups).unwrap();
        assert!(rows.iter().all(|r| r.validity_flag() == "ok"));
        let mut buf = Vec::new();
        write_sa_prediction_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(SA_PREDICTION_CSV_HEADER));
        assert!(text.lines().nth(1).unwrap().starts_with("saln,sqrt8N,10,20,100,"));
    }
}
