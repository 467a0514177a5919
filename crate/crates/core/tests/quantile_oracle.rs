//! The normal quantile against an independent inverse of `erfc`.

use sphere_es::coefficients::normal_quantile;

fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        // Maclaurin series of erf.
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= -x * x / n;
            sum += term / (2.0 * n + 1.0);
        }
        return 1.0 - sum * 2.0 / std::f64::consts::PI.sqrt();
    }
    // Continued fraction, modified Lentz.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        d = if d == 0.0 { tiny } else { 1.0 / d };
        c = x + a / c;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
}

/// Bisection on the lower or upper tail, whichever is exact for `p`.
fn oracle_quantile(p: f64) -> f64 {
    let sq2 = std::f64::consts::SQRT_2;
    let (lower, target) = if p < 0.5 { (true, p) } else { (false, 1.0 - p) };
    let tail = |z: f64| if lower { 0.5 * erfc(-z / sq2) } else { 0.5 * erfc(z / sq2) };
    let (mut lo, mut hi) = (-10.0f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let increasing = if lower { tail(mid) < target } else { tail(mid) > target };
        if increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn erfc_reference_points() {
    assert!((erfc(0.0) - 1.0).abs() < 1e-16);
    assert!((erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-15);
    assert!((erfc(3.0) / 2.209_049_699_858_544e-5 - 1.0).abs() < 1e-13);
}

#[test]
fn known_quantile() {
    let z = normal_quantile(0.975_002_104_9).unwrap();
    assert!((z - 1.96).abs() < 1e-6, "{z}");
}

#[test]
fn matches_oracle_on_log_grid() {
    let mut ps = Vec::new();
    for k in 0..=160 {
        let p = 10f64.powf(-8.0 + 8.0 * k as f64 / 160.0) * 0.5;
        ps.push(p.max(1e-8));
        ps.push(1.0 - p.max(1e-8));
    }
    for k in 1..100 {
        ps.push(k as f64 / 100.0);
    }
    for p in ps {
        let z = normal_quantile(p).unwrap();
        let o = oracle_quantile(p);
        assert!((z - o).abs() <= 1e-9, "p = {p}: {z} vs {o}");
    }
}
