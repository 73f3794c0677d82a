//! Concurrent proposers with conditional tips `(t, T)`: `T` is paid when a
//! single proposer includes the bid, `t` to each includer otherwise.
//!
//! Given a symmetric bribe `z` per proposer, proposers mix so each is
//! indifferent; the briber then either offers `T` and censors for sure or
//! offers nothing.

use crate::board::TipOffer;
use crate::distributions::ValueDistribution;
use crate::error::{invalid, Result};
use crate::game::{settle_auction, COLLUDER};
use crate::montecarlo::{run_trials, SimulationReport, SIMULATE_METRICS};
use crate::rng::UniformSource;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionalTip {
    /// Paid to each includer when more than one proposer includes.
    pub shared: f64,
    /// Paid when exactly one proposer includes.
    pub sole: f64,
}

impl ConditionalTip {
    pub fn new(shared: f64, sole: f64) -> Result<Self> {
        TipOffer::conditional(shared, sole)?;
        Ok(Self { shared, sole })
    }

    pub fn offer(&self) -> TipOffer {
        TipOffer::Conditional {
            shared: self.shared,
            sole: self.sole,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiProposerConfig {
    /// Number of concurrent proposers.
    pub m: u32,
    /// Number of honest bidders, each posting `(0, 1)`.
    pub n: usize,
    pub colluder: ValueDistribution,
    pub honest: ValueDistribution,
}

impl MultiProposerConfig {
    pub fn validate(&self) -> Result<()> {
        check_m(self.m)?;
        if self.n < 1 {
            return Err(invalid("need at least one honest bidder"));
        }
        Ok(())
    }
}

fn check_m(m: u32) -> Result<()> {
    if m < 2 {
        return Err(invalid(format!(
            "concurrent proposers need m >= 2, got {m}"
        )));
    }
    Ok(())
}

/// Each proposer's censoring probability when offered `z`.
pub fn censor_prob(z: f64, tip: ConditionalTip, m: u32) -> Result<f64> {
    check_m(m)?;
    let ConditionalTip {
        shared: t,
        sole: big_t,
    } = tip;
    Ok(if z >= big_t {
        1.0
    } else if z < t {
        0.0
    } else {
        ((z - t) / (big_t - t)).powf(1.0 / (m as f64 - 1.0))
    })
}

/// Marginal payoff of censoring for one proposer when the others censor with `p`:
/// `z - t - (T - t) p^(m-1)`.
pub fn indifference_residual(z: f64, p: f64, tip: ConditionalTip, m: u32) -> f64 {
    z - tip.shared - (tip.sole - tip.shared) * p.powi(m as i32 - 1)
}

/// `C p^m - m z p`, the briber's gain over not censoring.
pub fn briber_payoff(c: f64, z: f64, tip: ConditionalTip, m: u32) -> Result<f64> {
    let p = censor_prob(z, tip, m)?;
    Ok(c * p.powi(m as i32) - m as f64 * z * p)
}

/// `T` when censoring is worth at least `m T`, else `t` (which buys nothing).
pub fn optimal_bribe(c: f64, tip: ConditionalTip, m: u32) -> Result<f64> {
    check_m(m)?;
    Ok(if c >= m as f64 * tip.sole {
        tip.sole
    } else {
        tip.shared
    })
}

/// Value to bidder 0 of winning for free over competing in a second-price
/// auction against `rivals` bidders with law `honest`.
pub fn net_censor_value(v0: f64, honest: ValueDistribution, rivals: usize) -> Result<f64> {
    if !(v0 >= 0.0 && v0.is_finite()) {
        return Err(invalid(format!(
            "v0 must be a nonnegative finite number, got {v0}"
        )));
    }
    let upper = honest.upper();
    let inside = v0.min(upper);
    let below = honest.integral_cdf_pow(rivals as u32, 0.0, inside)? + (v0 - inside);
    Ok(v0 - below)
}

/// Plays the on-path equilibrium: every honest bidder posts `(0, 1)`, bidder 0
/// bribes optimally, proposers mix as in [`censor_prob`] and are paid only when
/// they censor. Metrics follow [`crate::montecarlo::simulate`]; `total_tip` is
/// tips actually paid.
pub fn simulate_multiproposer(
    config: &MultiProposerConfig,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    config.validate()?;
    if trials < 1 {
        return Err(invalid("need at least one trial"));
    }
    let (m, n) = (config.m, config.n);
    let per_bid = ConditionalTip::new(0.0, 1.0)?;
    let all = ConditionalTip {
        shared: per_bid.shared * n as f64,
        sole: per_bid.sole * n as f64,
    };
    net_censor_value(0.0, config.honest, n)?;

    let names = SIMULATE_METRICS.iter().map(|s| s.to_string()).collect();
    Ok(run_trials(names, trials, seed, |stream, out| {
        let v0 = config.colluder.sample(stream);
        let values: Vec<f64> = (0..n).map(|_| config.honest.sample(stream)).collect();
        // inputs were validated above
        let c = net_censor_value(v0, config.honest, n).unwrap_or(0.0);
        let z = optimal_bribe(c, all, m).unwrap_or(all.shared);
        let p = censor_prob(z, all, m).unwrap_or(0.0);
        let censors = (0..m).filter(|_| stream.next_uniform() < p).count() as u32;
        let bribe_paid = z * censors as f64;
        let censored = censors == m;
        let includers = m - censors;

        let tips_paid = match includers {
            0 => 0.0,
            1 => all.sole,
            k => all.shared * k as f64,
        };
        let mut bids = vec![(COLLUDER, v0)];
        if !censored {
            bids.extend(values.iter().enumerate().map(|(i, &v)| (i + 1, v)));
        }
        let (winner, price) = settle_auction(&bids, 0.0);
        let mut colluder_surplus = -bribe_paid;
        let mut honest_surplus = -tips_paid;
        match winner {
            Some(COLLUDER) => {
                out[0] = 1.0;
                colluder_surplus += v0 - price;
            }
            Some(w) => {
                out[1] = 1.0;
                honest_surplus += values[w - 1] - price;
            }
            None => out[2] = 1.0,
        }
        out[3] = colluder_surplus;
        out[4] = honest_surplus / n as f64;
        out[5] = if winner.is_some() { price } else { 0.0 };
        out[6] = bribe_paid + tips_paid;
        out[7] = if censored { 1.0 } else { 0.0 };
        out[8] = bribe_paid;
        out[9] = tips_paid;
    }))
}
