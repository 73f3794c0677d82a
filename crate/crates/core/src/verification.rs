//! Brute-force best-response checks for the tipping and bribing strategies.

use rayon::prelude::*;

use crate::equilibrium::{EquilibriumSolution, TipSchedule};
use crate::error::{invalid, Result};
use crate::game::settle_auction;
use crate::numerics::{integrate, integrate_pieces};

pub const DEFAULT_TOLERANCE: f64 = 1e-3;
/// Tolerance for the one-rival case, where utility has a closed form.
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;
pub const MAX_SUBSET_BIDDERS: usize = 20;

const INNER_TOL: f64 = 1e-11;
const OUTER_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DeviationReport {
    /// Largest gain over the grid, never an average.
    pub max_gain: f64,
    pub argmax: String,
    pub tolerance: f64,
}

impl DeviationReport {
    pub fn passed(&self) -> bool {
        self.max_gain <= self.tolerance
    }
}

/// `U(v, t) = a + b t - t (k0 + k1 t)` for one honest bidder with value `v`.
#[derive(Clone, Copy, Debug)]
struct Quadratic {
    a: f64,
    b: f64,
    k0: f64,
    k1: f64,
}

impl Quadratic {
    fn eval(&self, t: f64) -> f64 {
        self.a + self.b * t - t * (self.k0 + self.k1 * t)
    }
}

enum Utility {
    /// One honest bidder: `F0(r + m t) ((v - r)^+ - t)`.
    Single {
        v: f64,
    },
    Many(Quadratic),
}

impl Utility {
    fn eval(&self, sol: &EquilibriumSolution, t: f64) -> f64 {
        match *self {
            Utility::Single { v } => {
                let r = sol.reserve();
                let m = sol.bribe_rule().multiplier;
                sol.colluder().cdf(r + m * t) * ((v - r).max(0.0) - t)
            }
            Utility::Many(q) => q.eval(t),
        }
    }
}

fn schedule_pieces(sol: &EquilibriumSolution, lo: f64, hi: f64) -> Vec<f64> {
    let th = sol.threshold();
    if th > lo && th < hi {
        vec![lo, th, hi]
    } else {
        vec![lo, hi]
    }
}

// With S the rivals' total tip and M their highest value,
//   U = E[F0(r + m(S + t)) ((v - max(r, M))^+ - t)]
// and for F0 = U[0, k] the expectation splits through (v - max(r, M))^+ = int_r^v 1{M <= th} dth.
fn utility_of(sol: &EquilibriumSolution, rivals: &dyn TipSchedule, v: f64) -> Result<Utility> {
    let n = sol.n();
    if n == 1 {
        return Ok(Utility::Single { v });
    }
    let colluder = sol.colluder();
    if !colluder.is_uniform() {
        return Err(invalid(
            "utility with several rivals needs a uniform colluder law",
        ));
    }
    let kappa = colluder.upper();
    let f = sol.honest();
    let r = sol.reserve();
    let m = sol.bribe_rule().multiplier;
    let others = (n - 1) as f64;
    let upper = f.upper();

    let weighted = |w: f64| rivals.tip(w) * f.pdf(w);
    let partial_tip =
        |th: f64| integrate_pieces(weighted, &schedule_pieces(sol, 0.0, th), INNER_TOL);
    let c = integrate_pieces(weighted, &schedule_pieces(sol, 0.0, upper), INNER_TOL);

    let (a, b) = if v > r {
        let fp = |th: f64, k: i32| f.cdf(th).powi(k);
        let a = integrate(
            |th| r * fp(th, n as i32 - 1) + m * others * partial_tip(th) * fp(th, n as i32 - 2),
            r,
            v,
            OUTER_TOL,
        );
        let b = integrate(|th| fp(th, n as i32 - 1), r, v, OUTER_TOL);
        (a / kappa, m * b / kappa)
    } else {
        (0.0, 0.0)
    };
    Ok(Utility::Many(Quadratic {
        a,
        b,
        k0: (r + m * others * c) / kappa,
        k1: m / kappa,
    }))
}

/// Expected utility of an honest bidder with value `v` posting tip `t` while every rival follows `sol`.
pub fn utility_honest(v: f64, t: f64, sol: &EquilibriumSolution) -> Result<f64> {
    utility_against(v, t, sol, sol)
}

/// As [`utility_honest`], with rivals tipping according to `rivals`.
pub fn utility_against(
    v: f64,
    t: f64,
    sol: &EquilibriumSolution,
    rivals: &dyn TipSchedule,
) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) || !v.is_finite() {
        return Err(invalid(format!(
            "need finite v and t >= 0, got v = {v}, t = {t}"
        )));
    }
    Ok(utility_of(sol, rivals, v)?.eval(sol, t))
}

/// Central difference of `U(v, .)` at the equilibrium tip.
pub fn foc_residual(v: f64, sol: &EquilibriumSolution) -> Result<f64> {
    let u = utility_of(sol, sol, v)?;
    let t = sol.tip(v);
    Ok((u.eval(sol, t + FD_STEP) - u.eval(sol, t - FD_STEP)) / (2.0 * FD_STEP))
}

/// Largest utility gain from replacing the tip with any point of a `[0, v]` grid,
/// over a grid of honest values spanning the support.
pub fn verify_honest_br(
    sol: &EquilibriumSolution,
    v_grid: usize,
    t_grid: usize,
) -> Result<DeviationReport> {
    verify_schedule_br(sol, sol, v_grid, t_grid)
}

/// Checks that `schedule` is a best response to itself; `sol` supplies the laws, reserve and board.
pub fn verify_schedule_br(
    sol: &EquilibriumSolution,
    schedule: &(dyn TipSchedule + Sync),
    v_grid: usize,
    t_grid: usize,
) -> Result<DeviationReport> {
    if v_grid < 2 || t_grid < 2 {
        return Err(invalid("grids need at least two points"));
    }
    let upper = sol.honest().upper();
    let per_v: Vec<Result<(f64, f64, f64)>> = (0..v_grid)
        .into_par_iter()
        .map(|i| {
            let v = upper * i as f64 / (v_grid - 1) as f64;
            let u = utility_of(sol, schedule, v)?;
            let base = u.eval(sol, schedule.tip(v));
            let mut best = (f64::NEG_INFINITY, 0.0);
            for j in 0..t_grid {
                let t = v * j as f64 / (t_grid - 1) as f64;
                let gain = u.eval(sol, t) - base;
                if gain > best.0 {
                    best = (gain, t);
                }
            }
            Ok((best.0, v, best.1))
        })
        .collect();
    let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
    for row in per_v {
        let row = row?;
        if row.0 > worst.0 {
            worst = row;
        }
    }
    let tolerance = if sol.n() == 1 {
        CLOSED_FORM_TOLERANCE
    } else {
        DEFAULT_TOLERANCE
    };
    Ok(DeviationReport {
        max_gain: worst.0,
        argmax: format!("v = {}, t = {}", worst.1, worst.2),
        tolerance,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubsetReport {
    /// Best subset of honest ids to buy out; ties keep the full set.
    pub best: Vec<usize>,
    pub best_payoff: f64,
    pub full_payoff: f64,
}

impl SubsetReport {
    pub fn full_is_optimal(&self, n: usize) -> bool {
        self.best.len() == n
    }

    pub fn deviation(&self) -> DeviationReport {
        DeviationReport {
            max_gain: self.best_payoff - self.full_payoff,
            argmax: format!("{:?}", self.best),
            tolerance: 0.0,
        }
    }
}

/// Enumerates every set of honest bids bidder 0 could buy out. Buying `S` costs
/// the tips in `S`; bidder 0 then bids `v0` against the bidders outside `S`.
/// `tips[i]` and `values[i]` belong to honest bidder `i + 1`.
pub fn verify_bidder0_subsets(
    tips: &[f64],
    values: &[f64],
    v0: f64,
    reserve: f64,
) -> Result<SubsetReport> {
    let n = tips.len();
    if n > MAX_SUBSET_BIDDERS {
        return Err(invalid(format!(
            "subset enumeration is capped at {MAX_SUBSET_BIDDERS} bidders, got {n}"
        )));
    }
    if values.len() != n {
        return Err(invalid("tips and values differ in length"));
    }
    let payoff = |mask: u32| {
        let mut paid = 0.0;
        let mut bids = vec![(0, v0)];
        for i in 0..n {
            if mask & (1 << i) != 0 {
                paid += tips[i];
            } else {
                bids.push((i + 1, values[i]));
            }
        }
        match settle_auction(&bids, reserve) {
            (Some(0), price) => v0 - price - paid,
            _ => -paid,
        }
    };
    let full_mask = if n == 0 { 0 } else { u32::MAX >> (32 - n) };
    let full_payoff = payoff(full_mask);
    let (mut best_mask, mut best_payoff) = (full_mask, full_payoff);
    for mask in 0..full_mask {
        let p = payoff(mask);
        if p > best_payoff {
            best_mask = mask;
            best_payoff = p;
        }
    }
    let best = (0..n)
        .filter(|i| best_mask & (1 << i) != 0)
        .map(|i| i + 1)
        .collect();
    Ok(SubsetReport {
        best,
        best_payoff,
        full_payoff,
    })
}
