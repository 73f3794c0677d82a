//! Bidder value laws on `[0, upper]` and the grid checks the equilibrium
//! constructions assume of them.

use crate::error::{invalid, Result};
use crate::numerics::{inc_beta, integrate, ln_beta, QUAD_TOL};
use crate::rng::UniformSource;

/// Default resolution for the regularity and integral-bound checks.
pub const DEFAULT_CHECK_GRID: usize = 10_001;
const CHECK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    UniformUnit,
    /// Uniform on `[0, upper]`, `upper >= 1`.
    UniformScaled {
        upper: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
}

/// A value distribution. Construct through [`ValueDistribution::uniform`],
/// [`ValueDistribution::uniform_scaled`] or [`ValueDistribution::beta`] so the
/// parameters are always valid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueDistribution {
    family: Family,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityReport {
    pub holds: bool,
    pub first_violation: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssumptionReport {
    pub holds: bool,
    /// Max over the grid of `n * int_0^v F^(n-1) / v`.
    pub max_ratio: f64,
}

impl ValueDistribution {
    pub fn uniform() -> Self {
        Self {
            family: Family::UniformUnit,
        }
    }

    pub fn uniform_scaled(upper: f64) -> Result<Self> {
        if !upper.is_finite() || upper < 1.0 {
            return Err(invalid(format!(
                "uniform upper bound must be finite and >= 1, got {upper}"
            )));
        }
        Ok(Self {
            family: Family::UniformScaled { upper },
        })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(invalid(format!(
                "beta parameters must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(Self {
            family: Family::Beta { alpha, beta },
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn upper(&self) -> f64 {
        match self.family {
            Family::UniformScaled { upper } => upper,
            _ => 1.0,
        }
    }

    /// True for uniform laws, whose CDF is linear on the support.
    pub fn is_uniform(&self) -> bool {
        match self.family {
            Family::UniformUnit | Family::UniformScaled { .. } => true,
            Family::Beta { alpha, beta } => alpha == 1.0 && beta == 1.0,
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v.is_nan() {
            return f64::NAN;
        }
        let upper = self.upper();
        if v <= 0.0 {
            return 0.0;
        }
        if v >= upper {
            return 1.0;
        }
        match self.family {
            Family::UniformUnit => v,
            Family::UniformScaled { upper } => v / upper,
            Family::Beta { alpha, beta } => inc_beta(alpha, beta, v),
        }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if v.is_nan() {
            return f64::NAN;
        }
        let upper = self.upper();
        if !(0.0..=upper).contains(&v) {
            return 0.0;
        }
        match self.family {
            Family::UniformUnit => 1.0,
            Family::UniformScaled { upper } => 1.0 / upper,
            Family::Beta { alpha, beta } => {
                v.powf(alpha - 1.0) * (1.0 - v).powf(beta - 1.0) * (-ln_beta(alpha, beta)).exp()
            }
        }
    }

    /// `(F(v), f(v))`, clamped outside the support.
    pub fn eval(&self, v: f64) -> Result<(f64, f64)> {
        if !v.is_finite() {
            return Err(invalid(format!("value must be finite, got {v}")));
        }
        Ok((self.cdf(v), self.pdf(v)))
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self.family {
            Family::UniformUnit => u,
            Family::UniformScaled { upper } => u * upper,
            Family::Beta { .. } => {
                if u == 0.0 || u == 1.0 {
                    return u;
                }
                self.beta_quantile(u)
            }
        }
    }

    // Newton on the CDF, falling back to bisection whenever a step leaves the bracket.
    fn beta_quantile(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut x = 0.5;
        for _ in 0..200 {
            let err = self.cdf(x) - u;
            if err == 0.0 {
                return x;
            }
            if err > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let dens = self.pdf(x);
            let newton = x - err / dens;
            let next = if dens > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if (next - x).abs() <= 1e-16 * x.max(1e-300) || hi - lo <= f64::EPSILON * hi {
                return next;
            }
            x = next;
        }
        x
    }

    /// Inverse-transform draw.
    pub fn sample<S: UniformSource + ?Sized>(&self, stream: &mut S) -> f64 {
        self.quantile(stream.next_uniform())
    }

    /// Checks that `F/f` is nondecreasing on `grid_points` interior points of the support.
    pub fn check_regularity(&self, grid_points: usize) -> Result<RegularityReport> {
        if grid_points < 2 {
            return Err(invalid("regularity grid needs at least 2 points"));
        }
        let upper = self.upper();
        let step = upper / (grid_points + 1) as f64;
        let mut prev: Option<f64> = None;
        for i in 1..=grid_points {
            let x = step * i as f64;
            let dens = self.pdf(x);
            if !(dens > 0.0) {
                return Ok(RegularityReport {
                    holds: false,
                    first_violation: Some(x),
                });
            }
            let ratio = self.cdf(x) / dens;
            if let Some(p) = prev {
                if ratio < p - CHECK_TOL {
                    return Ok(RegularityReport {
                        holds: false,
                        first_violation: Some(x),
                    });
                }
            }
            prev = Some(ratio);
        }
        Ok(RegularityReport {
            holds: true,
            first_violation: None,
        })
    }

    /// Checks `int_0^v F^(n-1) <= v / n` on a uniform grid over `(0, 1]`.
    pub fn check_assumption(&self, n: usize, grid_points: usize) -> Result<AssumptionReport> {
        if n < 2 {
            return Err(invalid(format!("integral bound needs n >= 2, got {n}")));
        }
        if grid_points < 1 {
            return Err(invalid("grid needs at least one point"));
        }
        if self.upper() != 1.0 {
            return Err(invalid("integral bound is defined for laws on [0, 1]"));
        }
        let k = (n - 1) as i32;
        let step = 1.0 / grid_points as f64;
        let mut acc = 0.0;
        let mut max_ratio = 0.0_f64;
        let mut prev = 0.0;
        for i in 1..=grid_points {
            let v = if i == grid_points {
                1.0
            } else {
                step * i as f64
            };
            acc += integrate(
                |x| self.cdf(x).powi(k),
                prev,
                v,
                QUAD_TOL / grid_points as f64,
            );
            prev = v;
            max_ratio = max_ratio.max(n as f64 * acc / v);
        }
        Ok(AssumptionReport {
            holds: max_ratio <= 1.0 + CHECK_TOL,
            max_ratio,
        })
    }

    /// `int_a^b F(x)^k dx`.
    pub fn integral_cdf_pow(&self, k: u32, a: f64, b: f64) -> Result<f64> {
        if k < 1 {
            return Err(invalid("power must be >= 1"));
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(invalid("integration limits must be finite"));
        }
        if a > b {
            return Err(invalid(format!("lower limit {a} exceeds upper limit {b}")));
        }
        Ok(self.integral_cdf_pow_unchecked(k, a, b))
    }

    pub(crate) fn integral_cdf_pow_unchecked(&self, k: u32, a: f64, b: f64) -> f64 {
        let k = k as i32;
        integrate(|x| self.cdf(x).powi(k), a, b, QUAD_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    struct Fixed(f64);
    impl UniformSource for Fixed {
        fn next_uniform(&mut self) -> f64 {
            self.0
        }
    }

    fn beta22() -> ValueDistribution {
        ValueDistribution::beta(2.0, 2.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ValueDistribution::uniform().eval(0.5).unwrap(), (0.5, 1.0));
        let (c, p) = ValueDistribution::beta(1.0, 1.0)
            .unwrap()
            .eval(0.3)
            .unwrap();
        assert!((c - 0.3).abs() < 1e-14 && (p - 1.0).abs() < 1e-14);
        // composite midpoint rule on 6t(1-t), independent of inc_beta
        let m = 200_000;
        let h = 0.5 / m as f64;
        let oracle: f64 = (0..m)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                6.0 * t * (1.0 - t) * h
            })
            .sum();
        let (c, p) = beta22().eval(0.5).unwrap();
        assert!((c - oracle).abs() < 1e-11, "{c} vs {oracle}");
        assert!((p - 1.5).abs() < 1e-13);
    }

    #[test]
    fn eval_clamps_and_rejects_nan() {
        let u = ValueDistribution::uniform();
        assert_eq!(u.eval(-0.2).unwrap(), (0.0, 0.0));
        assert_eq!(u.eval(1.7).unwrap(), (1.0, 0.0));
        assert!(u.eval(f64::NAN).is_err());
        assert!(u.eval(f64::INFINITY).is_err());
    }

    #[test]
    fn constructors_validate() {
        assert!(ValueDistribution::uniform_scaled(0.5).is_err());
        assert!(ValueDistribution::uniform_scaled(f64::INFINITY).is_err());
        assert!(ValueDistribution::beta(0.0, 1.0).is_err());
        assert!(ValueDistribution::beta(1.0, -2.0).is_err());
    }

    #[test]
    fn sample_examples() {
        assert_eq!(ValueDistribution::uniform().sample(&mut Fixed(0.42)), 0.42);
        let scaled = ValueDistribution::uniform_scaled(3.0).unwrap();
        assert_eq!(scaled.sample(&mut Fixed(0.5)), 1.5);
        assert!((beta22().sample(&mut Fixed(0.5)) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn incomplete_beta_matches_statrs() {
        use statrs::distribution::{Beta, ContinuousCDF};
        for &(a, b) in &[(0.5, 2.0), (2.0, 2.0), (5.0, 1.0), (3.5, 7.25), (30.0, 2.0)] {
            let ours = ValueDistribution::beta(a, b).unwrap();
            let theirs = Beta::new(a, b).unwrap();
            for i in 1..100 {
                let x = i as f64 / 100.0;
                assert!(
                    (ours.cdf(x) - theirs.cdf(x)).abs() < 1e-12,
                    "({a},{b}) at {x}"
                );
            }
        }
    }

    #[test]
    fn regularity_examples() {
        assert!(
            ValueDistribution::uniform()
                .check_regularity(1000)
                .unwrap()
                .holds
        );
        assert!(beta22().check_regularity(1000).unwrap().holds);
        // grid oracle (scipy): F/f increments for Beta(0.5, 2) are all positive
        let r = ValueDistribution::beta(0.5, 2.0)
            .unwrap()
            .check_regularity(1000)
            .unwrap();
        assert!(r.holds && r.first_violation.is_none());
        assert!(ValueDistribution::uniform().check_regularity(1).is_err());
    }

    #[test]
    fn assumption_examples() {
        let r = ValueDistribution::uniform()
            .check_assumption(5, DEFAULT_CHECK_GRID)
            .unwrap();
        assert!(r.holds && r.max_ratio <= 1.0 + 1e-9);
        // exact: max ratio is n * int_0^1 F^(n-1); 3 * 13/35 for Beta(2,2)
        let r = beta22().check_assumption(3, DEFAULT_CHECK_GRID).unwrap();
        assert!(!r.holds);
        assert!((r.max_ratio - 39.0 / 35.0).abs() < 1e-9, "{}", r.max_ratio);
        // 2 * int_0^1 x^5 = 1/3
        let r = ValueDistribution::beta(5.0, 1.0)
            .unwrap()
            .check_assumption(2, DEFAULT_CHECK_GRID)
            .unwrap();
        assert!(r.holds);
        assert!((r.max_ratio - 1.0 / 3.0).abs() < 1e-9);
        assert!(ValueDistribution::uniform_scaled(2.0)
            .unwrap()
            .check_assumption(2, 10)
            .is_err());
    }

    #[test]
    fn assumption_holds_for_uniform_all_n() {
        for n in 2..=100 {
            let r = ValueDistribution::uniform()
                .check_assumption(n, 2001)
                .unwrap();
            assert!(r.holds, "n = {n}: {}", r.max_ratio);
        }
    }

    #[test]
    fn integral_examples() {
        let u = ValueDistribution::uniform();
        assert!((u.integral_cdf_pow(2, 0.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((u.integral_cdf_pow(1, 0.2, 0.6).unwrap() - 0.16).abs() < 1e-15);
        assert!(u.integral_cdf_pow(1, 0.6, 0.2).is_err());
        // exact polynomial: int (3x^2 - 2x^3)^3 = 43/140
        let got = beta22().integral_cdf_pow(3, 0.0, 1.0).unwrap();
        assert!((got - 43.0 / 140.0).abs() < 1e-10, "{got}");
    }

    #[test]
    fn integral_matches_monte_carlo() {
        use crate::rng::RandomStream;
        let d = beta22();
        let mut s = RandomStream::new(11, 0);
        let draws = 2_000_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            acc += d.cdf(s.next_uniform()).powi(3);
        }
        let mc = acc / draws as f64;
        assert!((mc - d.integral_cdf_pow(3, 0.0, 1.0).unwrap()).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn quantile_inverts_cdf(p in 0.01f64..0.99, a in 0.3f64..8.0, b in 0.3f64..8.0, k in 1.0f64..5.0) {
            for d in [ValueDistribution::uniform(), ValueDistribution::uniform_scaled(k).unwrap(), ValueDistribution::beta(a, b).unwrap()] {
                prop_assert!((d.cdf(d.quantile(p)) - p).abs() < 1e-12);
                let v = p * d.upper();
                // inversion in value space is only well posed where the density is not tiny
                if d.pdf(v) > 1e-3 {
                    prop_assert!((d.quantile(d.cdf(v)) - v).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn integral_is_additive(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, k in 1u32..6) {
            let mut pts = [a, b, c];
            pts.sort_by(f64::total_cmp);
            let d = ValueDistribution::beta(2.5, 1.5).unwrap();
            let whole = d.integral_cdf_pow(k, pts[0], pts[2]).unwrap();
            let split = d.integral_cdf_pow(k, pts[0], pts[1]).unwrap() + d.integral_cdf_pow(k, pts[1], pts[2]).unwrap();
            prop_assert!((whole - split).abs() < 1e-9);
        }

        #[test]
        fn cdf_is_monotone(x in 0.0f64..1.0, y in 0.0f64..1.0, a in 0.3f64..8.0, b in 0.3f64..8.0) {
            let d = ValueDistribution::beta(a, b).unwrap();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(d.cdf(lo) <= d.cdf(hi));
            prop_assert_eq!(d.cdf(0.0), 0.0);
            prop_assert_eq!(d.cdf(1.0), 1.0);
        }
    }
}
