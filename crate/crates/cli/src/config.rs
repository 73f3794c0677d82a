//! JSON run configs, one flat document per subcommand.

use censorship_auction::{BoardSpec, ValueDistribution};
use serde::Deserialize;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistConfig {
    Uniform {
        #[serde(default = "one")]
        upper: f64,
    },
    Beta {
        alpha: f64,
        beta: f64,
    },
}

impl Default for DistConfig {
    fn default() -> Self {
        DistConfig::Uniform { upper: 1.0 }
    }
}

impl DistConfig {
    pub fn build(&self) -> censorship_auction::Result<ValueDistribution> {
        match *self {
            DistConfig::Uniform { upper: 1.0 } => Ok(ValueDistribution::uniform()),
            DistConfig::Uniform { upper } => ValueDistribution::uniform_scaled(upper),
            DistConfig::Beta { alpha, beta } => ValueDistribution::beta(alpha, beta),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoardConfig {
    #[default]
    Single,
    Sequential {
        m: u32,
    },
    Concurrent {
        k: u32,
    },
}

impl BoardConfig {
    pub fn build(&self) -> censorship_auction::Result<BoardSpec> {
        match *self {
            BoardConfig::Single => Ok(BoardSpec::SingleBlock),
            BoardConfig::Sequential { m } => BoardSpec::sequential(m),
            BoardConfig::Concurrent { k } => BoardSpec::concurrent(k),
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub n: usize,
    #[serde(default)]
    pub reserve: f64,
    #[serde(default)]
    pub honest: DistConfig,
    #[serde(default)]
    pub colluder: DistConfig,
    #[serde(default)]
    pub board: BoardConfig,
    /// Solve general laws even when the integral bound fails.
    #[serde(default)]
    pub unchecked: bool,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_grid() -> usize {
    101
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub n: usize,
    #[serde(default)]
    pub reserve: f64,
    #[serde(default)]
    pub honest: DistConfig,
    #[serde(default)]
    pub colluder: DistConfig,
    #[serde(default)]
    pub board: BoardConfig,
    #[serde(default)]
    pub unchecked: bool,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub n: usize,
    #[serde(default)]
    pub reserve: f64,
    #[serde(default)]
    pub honest: DistConfig,
    #[serde(default)]
    pub colluder: DistConfig,
    #[serde(default)]
    pub board: BoardConfig,
    #[serde(default)]
    pub unchecked: bool,
    #[serde(default = "default_v_grid")]
    pub v_grid: usize,
    #[serde(default = "default_t_grid")]
    pub t_grid: usize,
    /// Additive shift applied to the schedule for the verifier-power check.
    pub perturb: Option<f64>,
    /// Random buy-out instances for the subset enumeration.
    #[serde(default)]
    pub subset_instances: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_v_grid() -> usize {
    201
}

fn default_t_grid() -> usize {
    2001
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BaselineConfig {
    pub bidders: usize,
    #[serde(default)]
    pub dist: DistConfig,
    #[serde(default)]
    pub reserve: f64,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FiguresConfig {
    pub n_min: usize,
    pub n_max: usize,
    #[serde(default)]
    pub dist: DistConfig,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MultiProposerRunConfig {
    pub m: u32,
    #[serde(default = "default_one_bidder")]
    pub n: usize,
    #[serde(default)]
    pub honest: DistConfig,
    #[serde(default)]
    pub colluder: DistConfig,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_one_bidder() -> usize {
    1
}

/// A flat tip `t`, or a conditional tip `(shared, sole)` for concurrent proposers.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub board: BoardConfig,
    pub t: Option<f64>,
    pub shared: Option<f64>,
    pub sole: Option<f64>,
}
