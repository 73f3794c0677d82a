//! Equilibrium tipping schedules for honest bidders and the colluding
//! bidder's buy-out rule.
//!
//! Honest bidders bid truthfully and attach a public tip `t(v)`. The colluder
//! sees every tip and buys out all honest bids whenever
//! `multiplier * sum(tips) <= v0 - r`. Each solver returns the schedule that
//! is a best response to that rule:
//!
//! * one honest bidder, any regular colluder law: `t(v)` solves
//!   `(v - r - t) f0(r + t) = F0(r + t)`;
//! * `n >= 2` uniform bidders: `t(v) = (v^n - vlo^n) / (2n)` above a threshold
//!   `vlo` that solves a degree-`n + 1` polynomial;
//! * `n >= 2` bidders drawn from a general `F`: `t(v) = 1/2 int_vlo^v F^(n-1)`;
//! * uniform bidders with a reserve: the mean tip is a scalar fixed point.

use crate::distributions::{ValueDistribution, DEFAULT_CHECK_GRID};
use crate::error::{invalid, Error, Result};
use crate::numerics::{
    bisect, bisect_exhaustive, integrate_pieces, BISECT_MAX_ITER, BISECT_TOL, QUAD_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GameKind {
    /// A single honest bidder against the colluder.
    TwoBidder,
    /// `n >= 2` honest bidders with values `U[0, 1]`.
    UniformN { n: usize },
    /// `n >= 2` honest bidders with a general value law.
    GeneralN { n: usize },
}

/// The colluder buys out every honest bid iff `multiplier * sum(tips) <= budget`,
/// where the budget is the value net of the reserve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BribeRule {
    /// Number of proposers that each have to be paid the full tip total.
    pub multiplier: f64,
}

impl BribeRule {
    pub fn single_block() -> Self {
        Self { multiplier: 1.0 }
    }

    pub fn over_blocks(m: u32) -> Self {
        Self {
            multiplier: m as f64,
        }
    }

    pub fn cost(&self, total_tip: f64) -> f64 {
        self.multiplier * total_tip
    }

    pub fn bribes(&self, budget: f64, total_tip: f64) -> bool {
        self.cost(total_tip) <= budget
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Schedule {
    /// Root of the two-bidder first-order condition.
    Foc,
    /// `max(0, (v^n / n - offset) / 2)`.
    Power { offset: f64 },
    /// `1/2 int_threshold^v F^(n-1)`.
    Integral,
}

/// A solved tipping equilibrium. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumSolution {
    kind: GameKind,
    reserve: f64,
    honest: ValueDistribution,
    colluder: ValueDistribution,
    threshold: f64,
    mean_tip: f64,
    bribe: BribeRule,
    schedule: Schedule,
    certified: bool,
}

impl EquilibriumSolution {
    pub fn kind(&self) -> GameKind {
        self.kind
    }

    /// Number of honest bidders.
    pub fn n(&self) -> usize {
        match self.kind {
            GameKind::TwoBidder => 1,
            GameKind::UniformN { n } | GameKind::GeneralN { n } => n,
        }
    }

    pub fn reserve(&self) -> f64 {
        self.reserve
    }

    pub fn honest(&self) -> ValueDistribution {
        self.honest
    }

    pub fn colluder(&self) -> ValueDistribution {
        self.colluder
    }

    /// Lowest honest value that tips a positive amount.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `E[t(v)]` under the honest law.
    pub fn mean_tip(&self) -> f64 {
        self.mean_tip
    }

    pub fn bribe_rule(&self) -> BribeRule {
        self.bribe
    }

    /// False when the solver skipped a hypothesis check (see [`solve_general_n_unchecked`]).
    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn tip(&self, v: f64) -> f64 {
        if !(v > self.threshold) {
            return 0.0;
        }
        let n = self.n();
        match self.schedule {
            Schedule::Foc => two_bidder_tip(&self.colluder, self.reserve, v),
            Schedule::Power { offset } => (0.5 * (v.powi(n as i32) / n as f64 - offset)).max(0.0),
            Schedule::Integral => {
                0.5 * self
                    .honest
                    .integral_cdf_pow_unchecked(n as u32 - 1, self.threshold, v)
            }
        }
    }

    /// Copy of this solution with every tip shifted by `delta`, clamped at 0.
    /// Used to check that best-response verification has power.
    pub fn perturbed(&self, delta: f64) -> PerturbedSchedule<'_> {
        PerturbedSchedule { base: self, delta }
    }
}

/// Anything that assigns a tip to an honest value.
pub trait TipSchedule {
    fn tip(&self, v: f64) -> f64;
}

impl TipSchedule for EquilibriumSolution {
    fn tip(&self, v: f64) -> f64 {
        EquilibriumSolution::tip(self, v)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PerturbedSchedule<'a> {
    pub base: &'a EquilibriumSolution,
    pub delta: f64,
}

impl TipSchedule for PerturbedSchedule<'_> {
    fn tip(&self, v: f64) -> f64 {
        (self.base.tip(v) + self.delta).max(0.0)
    }
}

fn check_reserve(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(invalid(format!("reserve must lie in [0, 1), got {r}")));
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!(
            "n = {n}: the n-bidder formulas need n >= 2; use solve_two_bidder for a single honest bidder"
        )));
    }
    Ok(())
}

// Bisection on interior midpoints only: the FOC can vanish identically at t = 0
// when f0(r) = 0, so the endpoint values are never used.
fn two_bidder_tip(colluder: &ValueDistribution, r: f64, v: f64) -> f64 {
    let foc = |t: f64| {
        let x = r + t;
        (v - x) * colluder.pdf(x) - colluder.cdf(x)
    };
    let (mut lo, mut hi) = (0.0, v - r);
    for _ in 0..BISECT_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= BISECT_TOL || mid <= lo || mid >= hi {
            break;
        }
        if foc(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `r + F0(r) / f0(r)`, with `F0/f0 -> 0` taken when both vanish at `r`.
fn two_bidder_threshold(colluder: &ValueDistribution, r: f64) -> f64 {
    let big_f = colluder.cdf(r);
    if big_f == 0.0 {
        return r;
    }
    let f = colluder.pdf(r);
    if !(f > 0.0) {
        return f64::INFINITY;
    }
    r + big_f / f
}

/// One honest bidder whose value follows the colluder's law.
pub fn solve_two_bidder(colluder: ValueDistribution, reserve: f64) -> Result<EquilibriumSolution> {
    solve_two_bidder_with(colluder, colluder, reserve)
}

pub fn solve_two_bidder_with(
    honest: ValueDistribution,
    colluder: ValueDistribution,
    reserve: f64,
) -> Result<EquilibriumSolution> {
    check_reserve(reserve)?;
    let reg = colluder.check_regularity(DEFAULT_CHECK_GRID)?;
    if let Some(at) = reg.first_violation {
        return Err(Error::Regularity { at });
    }
    let threshold = two_bidder_threshold(&colluder, reserve).min(honest.upper());
    let mut sol = EquilibriumSolution {
        kind: GameKind::TwoBidder,
        reserve,
        honest,
        colluder,
        threshold,
        mean_tip: 0.0,
        bribe: BribeRule::single_block(),
        schedule: Schedule::Foc,
        certified: true,
    };
    let upper = honest.upper();
    sol.mean_tip = integrate_pieces(
        |v| sol.tip(v) * honest.pdf(v),
        &[0.0, threshold, upper],
        QUAD_TOL,
    );
    Ok(sol)
}

/// Left side of the threshold polynomial for `n` uniform bidders:
/// `(n+1) v^n / (n(n-1)) - v^(n+1) / (n+1) - 1 / (n(n+1))`.
pub fn threshold_residual(n: usize, v: f64) -> f64 {
    let nf = n as f64;
    let vn = v.powi(n as i32);
    (nf + 1.0) * vn / (nf * (nf - 1.0)) - vn * v / (nf + 1.0) - 1.0 / (nf * (nf + 1.0))
}

/// `n >= 2` honest bidders and the colluder, all `U[0, 1]`, no reserve.
pub fn solve_uniform_n(n: usize) -> Result<EquilibriumSolution> {
    check_n(n)?;
    let threshold = bisect_exhaustive(|v| threshold_residual(n, v), 0.0, 1.0)?;
    let nf = n as f64;
    let vn = threshold.powi(n as i32);
    Ok(EquilibriumSolution {
        kind: GameKind::UniformN { n },
        reserve: 0.0,
        honest: ValueDistribution::uniform(),
        colluder: ValueDistribution::uniform(),
        threshold,
        mean_tip: vn / (nf * (nf - 1.0)),
        bribe: BribeRule::single_block(),
        schedule: Schedule::Power { offset: vn / nf },
        certified: true,
    })
}

/// Uniform bidders whose bids must sit in one of `m` sequential blocks; the
/// colluder's value is `U[0, kappa]` and has to pay every proposer.
///
/// The tipping schedule is the single-block one; only the buy-out threshold scales.
pub fn solve_multi_block(n: usize, m: u32, kappa: f64) -> Result<EquilibriumSolution> {
    check_n(n)?;
    if m < 1 || m as usize >= n {
        return Err(invalid(format!(
            "sequential blocks need 1 <= m < n, got m = {m}, n = {n}"
        )));
    }
    if m >= 2 && !(kappa > m as f64) {
        return Err(invalid(format!(
            "colluder support bound must exceed m = {m}, got {kappa}"
        )));
    }
    let colluder = if kappa == 1.0 {
        ValueDistribution::uniform()
    } else {
        ValueDistribution::uniform_scaled(kappa)?
    };
    let mut sol = solve_uniform_n(n)?;
    sol.colluder = colluder;
    sol.bribe = BribeRule::over_blocks(m);
    Ok(sol)
}

/// `n >= 2` honest bidders with law `honest`; the colluder is `U[0, 1]`.
/// Refuses when `int_0^v F^(n-1) <= v/n` fails, since the buy-out rule is then
/// no longer guaranteed optimal.
pub fn solve_general_n(honest: ValueDistribution, n: usize) -> Result<EquilibriumSolution> {
    check_n(n)?;
    let report = honest.check_assumption(n, DEFAULT_CHECK_GRID)?;
    if !report.holds {
        return Err(Error::Assumption {
            n,
            max_ratio: report.max_ratio,
        });
    }
    solve_general_n_unchecked(honest, n)
}

/// Same construction as [`solve_general_n`] without the integral-bound check.
/// The result is flagged as not certified.
pub fn solve_general_n_unchecked(
    honest: ValueDistribution,
    n: usize,
) -> Result<EquilibriumSolution> {
    check_n(n)?;
    if honest.upper() != 1.0 {
        return Err(invalid("general-law solver needs honest values on [0, 1]"));
    }
    let certified = honest.check_assumption(n, DEFAULT_CHECK_GRID)?.holds;
    let k = n as u32 - 1;
    let ratio = (n as f64 + 1.0) / (n as f64 - 1.0);
    let s_total = honest.integral_cdf_pow_unchecked(k, 0.0, 1.0);
    // decreasing in the threshold: derivative F^n - ratio F^(n-1) < 0
    let condition = |vlo: f64| {
        s_total
            - honest.integral_cdf_pow_unchecked(k + 1, vlo, 1.0)
            - ratio * honest.integral_cdf_pow_unchecked(k, 0.0, vlo)
    };
    let threshold = bisect(condition, 0.0, 1.0, BISECT_TOL, BISECT_MAX_ITER)?;
    let mean_tip = honest.integral_cdf_pow_unchecked(k, 0.0, threshold) / (n as f64 - 1.0);
    Ok(EquilibriumSolution {
        kind: GameKind::GeneralN { n },
        reserve: 0.0,
        honest,
        colluder: ValueDistribution::uniform(),
        threshold,
        mean_tip,
        bribe: BribeRule::single_block(),
        schedule: Schedule::Integral,
        certified,
    })
}

/// Mean tip implied by the reserve schedule when every other bidder's mean tip is `c`.
fn reserve_mean_tip(n: usize, r: f64, c: f64) -> f64 {
    let nf = n as f64;
    let offset = (nf - 1.0) * c + r + r.powi(n as i32) / nf;
    let vlo = (nf * offset).powf(1.0 / nf);
    if vlo >= 1.0 {
        return 0.0;
    }
    0.5 * ((1.0 - vlo.powi(n as i32 + 1)) / (nf * (nf + 1.0)) - offset * (1.0 - vlo))
}

/// `n >= 2` uniform bidders facing reserve `r`.
pub fn solve_uniform_n_reserve(n: usize, reserve: f64) -> Result<EquilibriumSolution> {
    check_n(n)?;
    check_reserve(reserve)?;
    let base = solve_uniform_n(n)?;
    let gap = |c: f64| reserve_mean_tip(n, reserve, c) - c;
    // the no-reserve mean tip bounds the fixed point from above
    let mean_tip = if gap(0.0) <= 0.0 {
        0.0
    } else if gap(base.mean_tip) >= 0.0 {
        base.mean_tip
    } else {
        bisect_exhaustive(gap, 0.0, base.mean_tip)?
    };
    let nf = n as f64;
    let offset = (nf - 1.0) * mean_tip + reserve + reserve.powi(n as i32) / nf;
    let threshold = (nf * offset).powf(1.0 / nf).min(1.0);
    Ok(EquilibriumSolution {
        kind: GameKind::UniformN { n },
        reserve,
        honest: ValueDistribution::uniform(),
        colluder: ValueDistribution::uniform(),
        threshold,
        mean_tip,
        bribe: BribeRule::single_block(),
        schedule: Schedule::Power { offset },
        certified: true,
    })
}

/// Dispatches on `n`: one honest bidder goes to the two-bidder solver, uniform
/// laws to the closed forms, anything else to the general-law solver.
pub fn solve(
    n: usize,
    honest: ValueDistribution,
    colluder: ValueDistribution,
    reserve: f64,
) -> Result<EquilibriumSolution> {
    if n == 0 {
        return Err(invalid("need at least one honest bidder"));
    }
    if n == 1 {
        return solve_two_bidder_with(honest, colluder, reserve);
    }
    if colluder != ValueDistribution::uniform() {
        return Err(invalid(
            "n >= 2 honest bidders are solved only for a U[0, 1] colluder",
        ));
    }
    if honest == ValueDistribution::uniform() {
        if reserve == 0.0 {
            solve_uniform_n(n)
        } else {
            solve_uniform_n_reserve(n, reserve)
        }
    } else if reserve == 0.0 {
        solve_general_n(honest, n)
    } else {
        Err(invalid(
            "reserve prices are solved only for uniform honest bidders",
        ))
    }
}

/// Expected sum of all honest tips.
pub fn expected_total_tip(sol: &EquilibriumSolution) -> f64 {
    let n = sol.n();
    match sol.kind {
        GameKind::UniformN { .. } if sol.reserve == 0.0 => {
            sol.threshold.powi(n as i32) / (n as f64 - 1.0)
        }
        _ => n as f64 * sol.mean_tip,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsRow {
    pub n: usize,
    pub threshold: f64,
    /// `vlo^n`, i.e. `(n - 1)` times the expected total tip.
    pub threshold_pow: f64,
    pub inv_n: f64,
    pub inv_sqrt_n: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub rows: Vec<BoundsRow>,
    /// Smallest `n` from which `1/n <= vlo^n` holds through the end of the range.
    pub lower_from: Option<usize>,
    /// Smallest `n` from which `vlo^n <= 1/sqrt(n)` holds through the end of the range.
    pub upper_from: Option<usize>,
    /// Smallest `n` from which both hold through the end of the range.
    pub both_from: Option<usize>,
}

/// Tabulates `1/n <= vlo(n)^n <= 1/sqrt(n)` over `[n_min, n_max]`.
pub fn bounds_report(n_min: usize, n_max: usize) -> Result<BoundsReport> {
    if n_min < 2 || n_min > n_max {
        return Err(invalid(format!(
            "need 2 <= n_min <= n_max, got [{n_min}, {n_max}]"
        )));
    }
    let mut rows = Vec::with_capacity(n_max - n_min + 1);
    for n in n_min..=n_max {
        let sol = solve_uniform_n(n)?;
        let threshold = sol.threshold();
        let pow = threshold.powi(n as i32);
        let inv_n = 1.0 / n as f64;
        let inv_sqrt_n = 1.0 / (n as f64).sqrt();
        rows.push(BoundsRow {
            n,
            threshold,
            threshold_pow: pow,
            inv_n,
            inv_sqrt_n,
            lower_holds: inv_n <= pow,
            upper_holds: pow <= inv_sqrt_n,
        });
    }
    let onset = |pred: &dyn Fn(&BoundsRow) -> bool| -> Option<usize> {
        let tail = rows.iter().rev().take_while(|r| pred(r)).count();
        (tail > 0).then(|| rows[rows.len() - tail].n)
    };
    let lower_from = onset(&|r| r.lower_holds);
    let upper_from = onset(&|r| r.upper_holds);
    let both_from = onset(&|r| r.lower_holds && r.upper_holds);
    Ok(BoundsReport {
        rows,
        lower_from,
        upper_from,
        both_from,
    })
}
