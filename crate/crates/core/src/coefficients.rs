//! Special functions and asymptotic progress coefficients.
//!
//! All theory in this crate uses the asymptotic (`lambda -> infinity` at fixed
//! truncation ratio) coefficients
//!
//! ```text
//! c_theta    = exp(-z^2 / 2) / (theta * sqrt(2 pi)),   z = Phi^-1(1 - theta)
//! e^{1,1}    = z * c_theta
//! e^{2,0}    = c_theta^2
//! ```
//!
//! which are the first two moments of the upper `theta`-tail of the standard
//! normal: `E[z | z > z_theta] = c_theta`, `E[z^2 | z > z_theta] - 1 = e^{1,1}`,
//! and the product moment of two distinct selected values tends to
//! `c_theta^2`. [`mc_selection_moments`] estimates the same quantities by
//! sampling and is the reference they are checked against.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::rng::StreamKey;

/// Truncation ratio `theta = mu / lambda`, strictly inside `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct TruncationRatio(f64);

impl TruncationRatio {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta < 1.0 {
            Ok(Self(theta))
        } else {
            Err(domain(format!("truncation ratio must lie in (0, 1), got {theta}")))
        }
    }

    pub fn from_populations(mu: usize, lambda: usize) -> Result<Self> {
        if mu == 0 || mu >= lambda {
            return Err(domain(format!("need 1 <= mu < lambda, got mu = {mu}, lambda = {lambda}")));
        }
        Self::new(mu as f64 / lambda as f64)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProgressCoefficients {
    pub c_theta: f64,
    pub e11: f64,
    pub e20: f64,
}

impl ProgressCoefficients {
    pub fn new(theta: TruncationRatio) -> Self {
        let (e11, e20) = generalized_coefficients(theta);
        Self { c_theta: c_theta(theta), e11, e20 }
    }
}

const A: [f64; 8] = [
    3.387_132_872_796_366_608,
    133.141_667_891_784_377_45,
    1_971.590_950_306_551_442_7,
    13_731.693_765_509_461_125,
    45_921.953_931_549_871_457,
    67_265.770_927_008_700_853,
    33_430.575_583_588_128_105,
    2_509.080_928_730_122_672_7,
];
const B: [f64; 8] = [
    1.0,
    42.313_330_701_600_911_252,
    687.187_007_492_057_908_3,
    5_394.196_021_424_751_107_7,
    21_213.794_301_586_595_867,
    39_307.895_800_092_710_61,
    28_729.085_735_721_942_674,
    5_226.495_278_852_545_925,
];
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_9,
    5.769_497_221_460_691_405_5,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    0.241_780_725_177_450_611_77,
    0.022_723_844_989_269_184_583_3,
    7.745_450_142_783_414_076_4e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_4,
    0.689_767_334_985_100_004_55,
    0.148_103_976_427_480_074_59,
    0.015_198_666_563_616_457_196_6,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const E: [f64; 8] = [
    6.657_904_643_501_103_777_2,
    5.463_784_911_164_114_369_9,
    1.784_826_539_917_291_335_8,
    0.296_560_571_828_504_891_23,
    0.026_532_189_526_576_123_093,
    0.001_242_660_947_388_078_438_6,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    0.599_832_206_555_887_937_69,
    0.136_929_880_922_735_805_31,
    0.014_875_361_290_850_614_852_5,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn horner(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc.mul_add(x, c))
}

/// Standard normal quantile `Phi^-1(p)` (Wichura's AS241, ~1e-16 relative).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("probability must lie in (0, 1), got {p}")));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return Ok(q * horner(&A, r) / horner(&B, r));
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        horner(&C, r) / horner(&D, r)
    } else {
        let r = r - 5.0;
        horner(&E, r) / horner(&F, r)
    };
    Ok(if q < 0.0 { -x } else { x })
}

/// Upper-tail threshold `z_theta = Phi^-1(1 - theta)`.
fn tail_threshold(theta: TruncationRatio) -> f64 {
    // theta is validated to (0, 1); 1 - theta cannot leave the domain.
    normal_quantile(1.0 - theta.value()).expect("theta in (0, 1)")
}

/// Asymptotic progress coefficient `c_theta`.
pub fn c_theta(theta: TruncationRatio) -> f64 {
    let z = tail_threshold(theta);
    (-0.5 * z * z).exp() / (theta.value() * (2.0 * std::f64::consts::PI).sqrt())
}

/// Asymptotic generalized coefficients `(e^{1,1}, e^{2,0})`.
pub fn generalized_coefficients(theta: TruncationRatio) -> (f64, f64) {
    let z = tail_threshold(theta);
    let c = c_theta(theta);
    (z * c, c * c)
}

/// Approximate mean of the chi distribution with `n` degrees of freedom,
/// `sqrt(N) (1 - 1/(4N) + 1/(21 N^2))`.
pub fn e_chi(n: usize) -> f64 {
    let n = n as f64;
    n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

impl Estimate {
    pub(crate) fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        if samples.len() < 2 {
            return Self { mean, std_err: f64::NAN };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Self { mean, std_err: (var / n).sqrt() }
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn contains(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err
    }
}

/// Moments of the `mu` largest of `lambda` iid standard normals.
#[derive(Clone, Copy, Debug)]
pub struct SelectionMoments {
    pub mu: usize,
    pub lambda: usize,
    /// `E[(1/mu) sum z_{m;lambda}]`
    pub m1: Estimate,
    /// `E[(1/mu) sum z_{m;lambda}^2]`
    pub m2: Estimate,
    /// `E[(1/(mu(mu-1))) sum_{m != k} z_{m;lambda} z_{k;lambda}]`, present for `mu >= 2`.
    pub m11: Option<Estimate>,
}

impl SelectionMoments {
    pub fn m11(&self) -> Result<Estimate> {
        self.m11
            .ok_or_else(|| domain(format!("m11 needs mu >= 2, got mu = {}", self.mu)))
    }
}

/// Samples `trials` sets of `lambda` standard normals and accumulates the
/// moments of the `mu` largest. Trial `t` draws from stream `t` of the key
/// derived from `seed`.
pub fn mc_selection_moments(
    mu: usize,
    lambda: usize,
    trials: usize,
    seed: u64,
) -> Result<SelectionMoments> {
    if mu == 0 || mu > lambda {
        return Err(domain(format!("need 1 <= mu <= lambda, got mu = {mu}, lambda = {lambda}")));
    }
    if trials == 0 {
        return Err(domain("trials must be positive"));
    }
    let key = StreamKey::from_seed(seed).derive(&[mu as u64, lambda as u64]);
    let per_trial: Vec<(f64, f64, f64)> = (0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0f64; lambda],
            |buf, t| {
                let mut rng = key.stream(t as u64);
                for z in buf.iter_mut() {
                    *z = StandardNormal.sample(&mut rng);
                }
                if mu < lambda {
                    buf.select_nth_unstable_by(mu - 1, |a, b| b.total_cmp(a));
                }
                let top = &buf[..mu];
                let s: f64 = top.iter().sum();
                let q: f64 = top.iter().map(|z| z * z).sum();
                let m = mu as f64;
                let cross = if mu >= 2 { (s * s - q) / (m * (m - 1.0)) } else { f64::NAN };
                (s / m, q / m, cross)
            },
        )
        .collect();
    let column = |f: fn(&(f64, f64, f64)) -> f64| per_trial.iter().map(f).collect::<Vec<_>>();
    Ok(SelectionMoments {
        mu,
        lambda,
        m1: Estimate::from_samples(&column(|t| t.0)),
        m2: Estimate::from_samples(&column(|t| t.1)),
        m11: (mu >= 2).then(|| Estimate::from_samples(&column(|t| t.2))),
    })
}

/// [`mc_selection_moments`] with `mu = round(theta * lambda)`.
pub fn mc_selection_moments_for(
    theta: TruncationRatio,
    lambda: usize,
    trials: usize,
    seed: u64,
) -> Result<SelectionMoments> {
    let mu = (theta.value() * lambda as f64).round() as usize;
    mc_selection_moments(mu, lambda, trials, seed)
}
