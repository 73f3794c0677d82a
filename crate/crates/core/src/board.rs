//! Bulletin-board designs and their censorship-resistance map: the least
//! an adversary must pay proposers to make a tipped write fail.
//!
//! Blocks are assumed uncongested, so a tipped transaction is always worth
//! including absent a bribe.

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoardSpec {
    SingleBlock,
    /// `m` consecutive blocks, each with its own proposer.
    SequentialBlocks {
        m: u32,
    },
    /// `k` proposers building blocks for the same slot.
    ConcurrentProposers {
        k: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TipOffer {
    Flat {
        t: f64,
    },
    /// Pays `sole` when exactly one proposer includes, `shared` to each includer otherwise.
    Conditional {
        shared: f64,
        sole: f64,
    },
}

impl BoardSpec {
    pub fn sequential(m: u32) -> Result<Self> {
        let board = BoardSpec::SequentialBlocks { m };
        board.validate()?;
        Ok(board)
    }

    pub fn concurrent(k: u32) -> Result<Self> {
        let board = BoardSpec::ConcurrentProposers { k };
        board.validate()?;
        Ok(board)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            BoardSpec::SequentialBlocks { m } if m < 1 => {
                Err(invalid("sequential boards need m >= 1"))
            }
            BoardSpec::ConcurrentProposers { k } if k < 2 => {
                Err(invalid("concurrent boards need k >= 2 proposers"))
            }
            _ => Ok(()),
        }
    }

    /// Number of proposers a censor has to pay off.
    pub fn proposers(&self) -> u32 {
        match *self {
            BoardSpec::SingleBlock => 1,
            BoardSpec::SequentialBlocks { m } => m,
            BoardSpec::ConcurrentProposers { k } => k,
        }
    }
}

impl TipOffer {
    pub fn conditional(shared: f64, sole: f64) -> Result<Self> {
        let offer = TipOffer::Conditional { shared, sole };
        offer.validate()?;
        Ok(offer)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TipOffer::Flat { t } if !(t >= 0.0 && t.is_finite()) => Err(invalid(format!(
                "tip must be a nonnegative finite number, got {t}"
            ))),
            TipOffer::Conditional { shared, sole }
                if !(shared >= 0.0 && shared.is_finite() && sole.is_finite() && sole >= shared) =>
            {
                Err(invalid(format!(
                    "conditional tip needs 0 <= t <= T, got ({shared}, {sole})"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            TipOffer::Flat { t } => TipOffer::Flat { t: factor * t },
            TipOffer::Conditional { shared, sole } => TipOffer::Conditional {
                shared: factor * shared,
                sole: factor * sole,
            },
        }
    }
}

/// Minimum total bribe that makes a write carrying `offer` fail on `board`.
pub fn censorship_resistance(board: BoardSpec, offer: TipOffer) -> Result<f64> {
    board.validate()?;
    offer.validate()?;
    match (board, offer) {
        (BoardSpec::SingleBlock, TipOffer::Flat { t }) => Ok(t),
        (BoardSpec::SequentialBlocks { m }, TipOffer::Flat { t }) => Ok(m as f64 * t),
        // only the sole-inclusion tip matters: each proposer forgoes T when all others censor
        (BoardSpec::ConcurrentProposers { k }, TipOffer::Conditional { sole, .. }) => {
            Ok(k as f64 * sole)
        }
        (BoardSpec::ConcurrentProposers { .. }, TipOffer::Flat { .. }) => Err(invalid(
            "concurrent proposers price conditional tips (t, T), not flat tips",
        )),
        (_, TipOffer::Conditional { .. }) => {
            Err(invalid("conditional tips need concurrent proposers"))
        }
    }
}
