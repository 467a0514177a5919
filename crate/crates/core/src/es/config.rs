use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::sphere_theory::PopulationSetup;

/// Which exponential sigma update the CSA uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CsaRule {
    /// `sigma exp((||s|| / E_chi - 1) / D)`
    V1,
    /// `sigma exp((c_sigma / d_sigma) (||s|| / E_chi - 1))`
    V2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CsaPreset {
    /// `c_sigma = 1/sqrt(N)`, `D = sqrt(N)`, rule V1.
    SqrtN,
    /// `c_sigma = 1/N`, `D = N`, rule V1.
    LinN,
    /// Default CMA-ES cumulation and damping with `mu_eff = mu`, rule V2.
    DefaultCma,
    Custom,
}

impl CsaPreset {
    pub const STANDARD: [CsaPreset; 3] = [CsaPreset::SqrtN, CsaPreset::LinN, CsaPreset::DefaultCma];

    pub fn name(self) -> &'static str {
        match self {
            CsaPreset::SqrtN => "sqrtN",
            CsaPreset::LinN => "linN",
            CsaPreset::DefaultCma => "default-cma",
            CsaPreset::Custom => "custom",
        }
    }
}

impl fmt::Display for CsaPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for CsaPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "sqrtn" | "sqrt-n" => Ok(CsaPreset::SqrtN),
            "linn" | "lin-n" => Ok(CsaPreset::LinN),
            "default-cma" | "cma" | "han" => Ok(CsaPreset::DefaultCma),
            other => Err(invalid(format!("unknown CSA preset '{other}'"))),
        }
    }
}

/// Cumulation constant, damping and update rule of a CSA-ES.
///
/// `damping` is `D` under [`CsaRule::V1`] and `d_sigma` under [`CsaRule::V2`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsaConfig {
    pub c_sigma: f64,
    pub damping: f64,
    pub rule: CsaRule,
    pub preset: CsaPreset,
}

impl CsaConfig {
    pub fn custom(c_sigma: f64, damping: f64, rule: CsaRule) -> Result<Self> {
        let cfg = Self { c_sigma, damping, rule, preset: CsaPreset::Custom };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_sigma > 0.0 && self.c_sigma <= 1.0) {
            return Err(invalid(format!("c_sigma must lie in (0, 1], got {}", self.c_sigma)));
        }
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return Err(invalid(format!("damping must be positive, got {}", self.damping)));
        }
        Ok(())
    }

    /// Damping `D` of the equivalent rule-V1 update. Rule V2 with
    /// `(c_sigma, d_sigma)` equals rule V1 with `D = d_sigma / c_sigma`.
    pub fn effective_damping(&self) -> f64 {
        match self.rule {
            CsaRule::V1 => self.damping,
            CsaRule::V2 => self.damping / self.c_sigma,
        }
    }

    /// The same controller expressed with rule V1.
    pub fn as_rule_v1(&self) -> Self {
        Self { damping: self.effective_damping(), rule: CsaRule::V1, ..*self }
    }

    /// Multiplicative sigma factor for a given ratio `||s|| / E_chi`.
    pub(crate) fn sigma_factor(&self, norm_ratio: f64) -> f64 {
        let u = norm_ratio - 1.0;
        match self.rule {
            CsaRule::V1 => (u / self.damping).exp(),
            CsaRule::V2 => (self.c_sigma / self.damping * u).exp(),
        }
    }
}

fn default_cma_c_sigma(setup: &PopulationSetup) -> f64 {
    let (mu, n) = (setup.mu() as f64, setup.n() as f64);
    (mu + 2.0) / (n + mu + 5.0)
}

fn default_cma_g(setup: &PopulationSetup) -> f64 {
    let (mu, n) = (setup.mu() as f64, setup.n() as f64);
    2.0 * (((mu - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0)
}

pub fn csa_preset(preset: CsaPreset, setup: &PopulationSetup) -> Result<CsaConfig> {
    let n = setup.n() as f64;
    let (c_sigma, damping, rule) = match preset {
        CsaPreset::SqrtN => (1.0 / n.sqrt(), n.sqrt(), CsaRule::V1),
        CsaPreset::LinN => (1.0 / n, n, CsaRule::V1),
        CsaPreset::DefaultCma => {
            let c = default_cma_c_sigma(setup);
            (c, 1.0 + c + default_cma_g(setup), CsaRule::V2)
        }
        CsaPreset::Custom => return Err(invalid("the custom preset has no defaults")),
    };
    Ok(CsaConfig { c_sigma, damping, rule, preset })
}

/// Rule-V1 damping of the default CMA-ES preset, `1 + 1/c_sigma + g(N, mu)/c_sigma`.
pub fn effective_damping_default_cma(setup: &PopulationSetup) -> f64 {
    let c = default_cma_c_sigma(setup);
    1.0 + 1.0 / c + default_cma_g(setup) / c
}

/// Large-`mu` asymptote `2 sqrt(mu / N)` of [`effective_damping_default_cma`].
pub fn default_cma_damping_asymptote(setup: &PopulationSetup) -> f64 {
    2.0 * (setup.mu() as f64 / setup.n() as f64).sqrt()
}

/// Offspring mutation-strength sampling of the σSA-ES.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SaScheme {
    /// `sigma exp(tau N(0,1))`
    LogNormal,
    /// `sigma (1 + tau N(0,1))`
    Normal,
}

impl SaScheme {
    pub fn name(self) -> &'static str {
        match self {
            SaScheme::LogNormal => "saln",
            SaScheme::Normal => "saep",
        }
    }
}

impl fmt::Display for SaScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SaScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "saln" | "log-normal" | "lognormal" => Ok(SaScheme::LogNormal),
            "saep" | "normal" => Ok(SaScheme::Normal),
            other => Err(invalid(format!("unknown self-adaptation scheme '{other}'"))),
        }
    }
}

/// Learning-parameter rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauRule {
    Sqrt8N,
    Sqrt2N,
    SqrtN,
    Value(f64),
}

impl TauRule {
    pub fn tau(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            TauRule::Sqrt8N => 1.0 / (8.0 * n).sqrt(),
            TauRule::Sqrt2N => 1.0 / (2.0 * n).sqrt(),
            TauRule::SqrtN => 1.0 / n.sqrt(),
            TauRule::Value(t) => t,
        }
    }

    pub fn name(self) -> String {
        match self {
            TauRule::Sqrt8N => "sqrt8N".into(),
            TauRule::Sqrt2N => "sqrt2N".into(),
            TauRule::SqrtN => "sqrtN".into(),
            TauRule::Value(t) => format!("value:{t}"),
        }
    }
}

/// Learning parameter and sampling scheme of a σSA-ES.
///
/// Under [`SaScheme::Normal`] a sampled `sigma~ <= 0` is replaced by
/// `sigma_floor * sigma`; the offspring then takes a negligible step and is
/// ranked as usual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaConfig {
    pub tau: f64,
    pub scheme: SaScheme,
    pub sigma_floor: f64,
}

impl SaConfig {
    pub const DEFAULT_SIGMA_FLOOR: f64 = 1e-20;

    pub fn new(tau: f64, scheme: SaScheme) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { tau, scheme, sigma_floor: Self::DEFAULT_SIGMA_FLOOR })
    }

    pub fn from_rule(rule: TauRule, scheme: SaScheme, n: usize) -> Result<Self> {
        Self::new(rule.tau(n), scheme)
    }

    /// Offspring mutation strength for a standard normal draw `xi`.
    pub(crate) fn sample_sigma(&self, sigma: f64, xi: f64) -> f64 {
        match self.scheme {
            SaScheme::LogNormal => sigma * (self.tau * xi).exp(),
            SaScheme::Normal => {
                let s = sigma * (1.0 + self.tau * xi);
                if s > 0.0 {
                    s
                } else {
                    self.sigma_floor * sigma
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(mu: usize, n: usize) -> PopulationSetup {
        PopulationSetup::with_ratio(mu, 0.5, n).unwrap()
    }

    #[test]
    fn sqrt_n_preset() {
        let cfg = csa_preset(CsaPreset::SqrtN, &setup(10, 100)).unwrap();
        assert!((cfg.c_sigma - 0.1).abs() < 1e-15);
        assert!((cfg.damping - 10.0).abs() < 1e-15);
        assert_eq!(cfg.rule, CsaRule::V1);
        let lin = csa_preset(CsaPreset::LinN, &setup(10, 100)).unwrap();
        assert_eq!((lin.c_sigma, lin.damping), (0.01, 100.0));
    }

    #[test]
    fn default_cma_cumulation_tends_to_one() {
        let c = csa_preset(CsaPreset::DefaultCma, &setup(10_000_000, 100)).unwrap().c_sigma;
        assert!(1.0 - c < 2e-5);
        let s = PopulationSetup::new(1, 2, 50).unwrap();
        let cfg = csa_preset(CsaPreset::DefaultCma, &s).unwrap();
        assert_eq!(cfg.damping, 1.0 + cfg.c_sigma);
    }

    #[test]
    fn default_cma_effective_damping() {
        let s = setup(1_000_000, 100);
        let ratio = effective_damping_default_cma(&s) / default_cma_damping_asymptote(&s);
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");

        let s = setup(5, 100);
        let c = csa_preset(CsaPreset::DefaultCma, &s).unwrap().c_sigma;
        assert!((effective_damping_default_cma(&s) - (1.0 + 1.0 / c)).abs() < 1e-12);
    }

    #[test]
    fn rule_equivalence() {
        for (mu, n) in [(5, 100), (1000, 100), (3000, 10)] {
            let s = setup(mu, n);
            let v2 = csa_preset(CsaPreset::DefaultCma, &s).unwrap();
            let v1 = v2.as_rule_v1();
            assert!((v1.damping - effective_damping_default_cma(&s)).abs() < 1e-12 * v1.damping);
            for u in [-0.1, 0.1] {
                let a = v2.sigma_factor(1.0 + u);
                let b = v1.sigma_factor(1.0 + u);
                assert!((a - b).abs() <= 2.0 * f64::EPSILON * a, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(CsaConfig::custom(0.0, 1.0, CsaRule::V1).is_err());
        assert!(CsaConfig::custom(1.5, 1.0, CsaRule::V1).is_err());
        assert!(CsaConfig::custom(0.5, 0.0, CsaRule::V1).is_err());
        assert!(SaConfig::new(0.0, SaScheme::Normal).is_err());
        assert!(csa_preset(CsaPreset::Custom, &setup(2, 2)).is_err());
    }

    #[test]
    fn normal_scheme_floor() {
        let cfg = SaConfig::new(0.5, SaScheme::Normal).unwrap();
        assert_eq!(cfg.sample_sigma(2.0, -3.0), 2.0 * SaConfig::DEFAULT_SIGMA_FLOOR);
        assert_eq!(cfg.sample_sigma(2.0, 1.0), 3.0);
    }

    #[test]
    fn names_parse_back() {
        for p in CsaPreset::STANDARD {
            assert_eq!(p.name().parse::<CsaPreset>().unwrap(), p);
        }
        for s in [SaScheme::LogNormal, SaScheme::Normal] {
            assert_eq!(s.name().parse::<SaScheme>().unwrap(), s);
        }
    }
}
