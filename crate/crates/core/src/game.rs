//! One play of the tip / bribe / settle game.
//!
//! Bidder 0 is the colluder; bidders `1..=n` are honest. Honest bidders bid
//! their value and post their equilibrium tip. The colluder either buys out
//! every honest bid (paying the tip total to each proposer) and bids its value,
//! or abstains. The included bids then clear in a second-price auction.

use crate::board::BoardSpec;
use crate::distributions::ValueDistribution;
use crate::equilibrium::EquilibriumSolution;
use crate::error::{invalid, Result};

pub const COLLUDER: usize = 0;

#[derive(Clone, Debug, PartialEq)]
pub struct AuctionConfig {
    /// Number of honest bidders.
    pub n: usize,
    pub reserve: f64,
    pub honest: ValueDistribution,
    pub colluder: ValueDistribution,
    pub board: BoardSpec,
}

impl AuctionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("need at least one honest bidder"));
        }
        if !(0.0..1.0).contains(&self.reserve) {
            return Err(invalid(format!(
                "reserve must lie in [0, 1), got {}",
                self.reserve
            )));
        }
        self.board.validate()?;
        match self.board {
            BoardSpec::ConcurrentProposers { .. } => Err(invalid(
                "concurrent proposers are played by the multiproposer module",
            )),
            BoardSpec::SequentialBlocks { m } if m >= 2 && !(self.colluder.upper() > m as f64) => {
                Err(invalid(format!(
                    "{m} sequential blocks need the colluder's support to exceed {m}"
                )))
            }
            _ => Ok(()),
        }
    }

    fn check_solution(&self, sol: &EquilibriumSolution) -> Result<()> {
        let mismatch = |what: &str| Err(invalid(format!("solution does not match config: {what}")));
        if sol.n() != self.n {
            return mismatch("number of honest bidders");
        }
        if sol.reserve() != self.reserve {
            return mismatch("reserve");
        }
        if sol.honest() != self.honest {
            return mismatch("honest value law");
        }
        if sol.colluder() != self.colluder {
            return mismatch("colluder value law");
        }
        if sol.bribe_rule().multiplier != self.board.proposers() as f64 {
            return mismatch("bribe multiplier vs. number of blocks");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameOutcome {
    /// Index 0 is the colluder.
    pub values: Vec<f64>,
    /// One entry per honest bidder; `tips[i - 1]` belongs to bidder `i`.
    pub tips: Vec<f64>,
    pub bribed: bool,
    pub bribe_paid: f64,
    /// Bidder ids whose bids reached the auction, ascending.
    pub included: Vec<usize>,
    pub winner: Option<usize>,
    pub price: f64,
    pub surplus: Vec<f64>,
    pub seller_revenue: f64,
    pub proposer_revenue: f64,
}

impl GameOutcome {
    pub fn total_tip(&self) -> f64 {
        self.tips.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BribeDecision {
    pub bribe: bool,
    pub payment: f64,
}

/// Buy out every tip iff `multiplier * sum(tips) <= budget`; ties go to bribing.
pub fn bribe_decision(budget: f64, tips: &[f64], multiplier: f64) -> BribeDecision {
    let cost = multiplier * tips.iter().sum::<f64>();
    if cost <= budget {
        BribeDecision {
            bribe: true,
            payment: cost,
        }
    } else {
        BribeDecision {
            bribe: false,
            payment: 0.0,
        }
    }
}

/// A proposer drops the targeted bids iff the payment covers their tips.
pub fn proposer_decision(tips_of_subset: f64, offered_payment: f64) -> bool {
    offered_payment >= tips_of_subset
}

/// Second-price settlement with reserve. Ties on the top bid go to the lowest id.
pub fn settle_auction(bids: &[(usize, f64)], reserve: f64) -> (Option<usize>, f64) {
    let mut best: Option<(usize, f64)> = None;
    for &(id, bid) in bids {
        best = match best {
            Some((bid_id, b)) if b > bid || (b == bid && bid_id < id) => Some((bid_id, b)),
            _ => Some((id, bid)),
        };
    }
    let Some((winner, top)) = best else {
        return (None, 0.0);
    };
    if top < reserve {
        return (None, 0.0);
    }
    let runner_up = bids
        .iter()
        .filter(|&&(id, _)| id != winner)
        .map(|&(_, b)| b)
        .fold(f64::NEG_INFINITY, f64::max);
    (Some(winner), runner_up.max(reserve))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CensorMode {
    #[default]
    Equilibrium,
    /// The colluder never bribes and never bids: a plain second-price auction among honest bidders.
    Disabled,
}

pub fn play_game(
    config: &AuctionConfig,
    sol: &EquilibriumSolution,
    values: &[f64],
) -> Result<GameOutcome> {
    play_game_with(config, sol, values, CensorMode::Equilibrium)
}

pub fn play_game_with(
    config: &AuctionConfig,
    sol: &EquilibriumSolution,
    values: &[f64],
    mode: CensorMode,
) -> Result<GameOutcome> {
    config.validate()?;
    config.check_solution(sol)?;
    if values.len() != config.n + 1 {
        return Err(invalid(format!(
            "expected {} values, got {}",
            config.n + 1,
            values.len()
        )));
    }
    for (i, &v) in values.iter().enumerate() {
        let upper = if i == COLLUDER {
            config.colluder.upper()
        } else {
            config.honest.upper()
        };
        if !(0.0..=upper).contains(&v) {
            return Err(invalid(format!(
                "value {v} of bidder {i} is outside [0, {upper}]"
            )));
        }
    }
    Ok(play_unchecked(config, sol, values, mode))
}

pub(crate) fn play_unchecked(
    config: &AuctionConfig,
    sol: &EquilibriumSolution,
    values: &[f64],
    mode: CensorMode,
) -> GameOutcome {
    let n = config.n;
    let r = config.reserve;
    let v0 = values[COLLUDER];
    let tips: Vec<f64> = values[1..].iter().map(|&v| sol.tip(v)).collect();
    let total_tip: f64 = tips.iter().sum();
    let proposers = config.board.proposers();

    let decision = match mode {
        CensorMode::Equilibrium => bribe_decision(v0 - r, &tips, sol.bribe_rule().multiplier),
        CensorMode::Disabled => BribeDecision {
            bribe: false,
            payment: 0.0,
        },
    };
    // each proposer is offered exactly the tips it forgoes (payment / proposers,
    // without the rounding of the division); the bids drop only if all accept
    let bribed = decision.bribe && (0..proposers).all(|_| proposer_decision(total_tip, total_tip));

    let (included, bids): (Vec<usize>, Vec<(usize, f64)>) = if bribed {
        (vec![COLLUDER], vec![(COLLUDER, v0)])
    } else {
        ((1..=n).collect(), (1..=n).map(|i| (i, values[i])).collect())
    };
    let (winner, price) = settle_auction(&bids, r);
    let bribe_paid = if bribed { decision.payment } else { 0.0 };

    let mut surplus = vec![0.0; n + 1];
    let mut proposer_revenue = bribe_paid;
    if bribed {
        surplus[COLLUDER] = -bribe_paid;
    } else {
        for i in 1..=n {
            surplus[i] = -tips[i - 1];
            proposer_revenue += tips[i - 1];
        }
    }
    if let Some(w) = winner {
        surplus[w] += values[w] - price;
    }
    GameOutcome {
        values: values.to_vec(),
        tips,
        bribed,
        bribe_paid,
        included,
        winner,
        price: if winner.is_some() { price } else { 0.0 },
        surplus,
        seller_revenue: if winner.is_some() { price } else { 0.0 },
        proposer_revenue,
    }
}
