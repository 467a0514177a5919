//! Scalar root finding and maximization.

use crate::error::{Error, Result};

/// Tolerances for [`brent_root`]. Iteration stops as soon as either the
/// residual or the bracket width falls below its threshold.
#[derive(Clone, Copy, Debug)]
pub struct RootTolerance {
    pub f_abs: f64,
    pub x_rel: f64,
    pub max_iter: usize,
}

impl Default for RootTolerance {
    fn default() -> Self {
        Self { f_abs: 1e-12, x_rel: 4.0 * f64::EPSILON, max_iter: 200 }
    }
}

/// Brent's bracketed bisection/secant/inverse-quadratic root finder.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs.
pub fn brent_root<F>(mut f: F, lo: f64, hi: f64, tol: RootTolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return Err(Error::Bracketing { lo, hi, f_lo: fa, f_hi: fb });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let xtol = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol.x_rel * b.abs().max(f64::MIN_POSITIVE);
        let m = 0.5 * (c - b);
        if fb.abs() <= tol.f_abs || m.abs() <= xtol {
            return Ok(b);
        }
        if e.abs() >= xtol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (xtol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > xtol { d } else { xtol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(Error::Bracketing { lo, hi, f_lo: fa, f_hi: fb });
        }
    }
    Ok(b)
}

/// Golden-section search for the maximizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, x_rel: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > x_rel * 0.5 * (a.abs() + b.abs()) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        if b - a <= f64::EPSILON * b.abs() {
            break;
        }
    }
    0.5 * (a + b)
}
