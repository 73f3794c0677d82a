//! Scalar numerics shared by the solvers: adaptive Simpson quadrature,
//! bracketing bisection, and the regularized incomplete beta function.

use crate::error::{Error, Result};

/// Absolute tolerance used for every quadrature in the crate.
pub const QUAD_TOL: f64 = 1e-10;
/// Recursion cap for adaptive Simpson.
pub const QUAD_MAX_DEPTH: u32 = 60;
/// Bisection stops once the bracket is narrower than this.
pub const BISECT_TOL: f64 = 1e-12;
pub const BISECT_MAX_ITER: usize = 200;

/// Integrates `f` over `[a, b]` with adaptive Simpson to absolute tolerance `tol`.
///
/// Returns 0 for an empty interval. `a > b` integrates backwards.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, QUAD_MAX_DEPTH)
}

/// Integrates over consecutive pieces `points[i]..points[i+1]`; used to split at kinks.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> f64 {
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    points
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / pieces))
        .sum()
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || m <= a || m >= b {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Finds a root of `f` on `[lo, hi]` by bisection.
///
/// Requires a sign change (a zero at either endpoint counts). Stops when the
/// bracket is narrower than `tol`, after `max_iter` halvings, or when the
/// midpoint can no longer be represented between the endpoints.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoSignChange { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection to machine precision, for callers that need more than `BISECT_TOL`.
pub fn bisect_exhaustive<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64> {
    bisect(f, lo, hi, 0.0, BISECT_MAX_ITER)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta `I_x(a, b)` by Lentz's continued fraction.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomials() {
        assert!((integrate(|x| x * x, 0.0, 1.0, QUAD_TOL) - 1.0 / 3.0).abs() < 1e-14);
        assert!((integrate(|x| x, 0.2, 0.6, QUAD_TOL) - 0.16).abs() < 1e-14);
        assert!((integrate(|x| x, 0.6, 0.2, QUAD_TOL) + 0.16).abs() < 1e-14);
        assert_eq!(integrate(|x| x, 0.3, 0.3, QUAD_TOL), 0.0);
    }

    #[test]
    fn simpson_singular_integrand() {
        // int_0^1 sqrt(x) = 2/3, derivative blows up at 0
        let got = integrate(f64::sqrt, 0.0, 1.0, QUAD_TOL);
        assert!((got - 2.0 / 3.0).abs() < 1e-9, "{got}");
    }

    #[test]
    fn simpson_kink_split() {
        let f = |x: f64| (x - 0.3).max(0.0);
        let got = integrate_pieces(f, &[0.0, 0.3, 1.0], QUAD_TOL);
        assert!((got - 0.245).abs() < 1e-14);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, BISECT_TOL, BISECT_MAX_ITER).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let r = bisect_exhaustive(|x| 2.0 - x * x, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 4e-16);
    }

    #[test]
    fn bisect_requires_sign_change() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, BISECT_TOL, 10).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
    }

    #[test]
    fn inc_beta_closed_forms() {
        // I_x(1,1) = x; I_x(2,2) = 3x^2 - 2x^3; I_x(a,1) = x^a
        for &x in &[0.01, 0.2, 0.5, 0.77, 0.99] {
            assert!((inc_beta(1.0, 1.0, x) - x).abs() < 1e-14);
            let poly = 3.0 * x * x - 2.0 * x * x * x;
            assert!((inc_beta(2.0, 2.0, x) - poly).abs() < 1e-13);
            assert!((inc_beta(5.0, 1.0, x) - x.powi(5)).abs() < 1e-13);
        }
    }
}
