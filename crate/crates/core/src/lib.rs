//! Equilibrium solver and simulator for sealed-bid second-price auctions
//! whose bids travel through a block proposer that a colluding bidder can bribe.

// `!(x > y)` is the NaN-rejecting form throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod board;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod montecarlo;
pub mod multiproposer;
pub mod numerics;
pub mod rng;
pub mod verification;

pub use board::{censorship_resistance, BoardSpec, TipOffer};
pub use distributions::{Family, ValueDistribution};
pub use equilibrium::{BribeRule, EquilibriumSolution, GameKind};
pub use error::{Error, Result};
pub use game::{AuctionConfig, GameOutcome};
pub use montecarlo::{Estimate, SimulationReport};
pub use rng::{RandomStream, UniformSource};
