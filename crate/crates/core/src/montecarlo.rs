//! Seeded Monte Carlo over [`play_game`](crate::game::play_game).
//!
//! Trial `i` draws from its own ChaCha8 stream keyed by `(seed, i)`. Trials are
//! grouped into fixed-size chunks, chunks run in parallel, and chunk sums are
//! folded in index order, so a report depends only on its inputs and never on
//! the thread count.

use rayon::prelude::*;

use crate::distributions::ValueDistribution;
use crate::equilibrium::{
    expected_total_tip, solve_general_n, solve_uniform_n, EquilibriumSolution,
};
use crate::error::{invalid, Error, Result};
use crate::game::{play_unchecked, settle_auction, AuctionConfig, CensorMode, COLLUDER};
use crate::rng::RandomStream;

const CHUNK: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub name: String,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationReport {
    pub trials: u64,
    pub metrics: Vec<Estimate>,
}

impl SimulationReport {
    pub fn get(&self, name: &str) -> Option<&Estimate> {
        self.metrics.iter().find(|e| e.name == name)
    }

    /// Mean of the named metric; panics on an unknown name.
    pub fn mean(&self, name: &str) -> f64 {
        self.get(name)
            .unwrap_or_else(|| panic!("no metric named {name}"))
            .mean
    }
}

#[derive(Clone, Debug)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self {
            sum: vec![0.0; k],
            sum_sq: vec![0.0; k],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        for (i, &x) in xs.iter().enumerate() {
            self.sum[i] += x;
            self.sum_sq[i] += x * x;
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self
    }
}

/// Runs `trial(stream, out)` for `trials` independent streams and summarises each slot of `out`.
pub(crate) fn run_trials<F>(
    names: Vec<String>,
    trials: u64,
    seed: u64,
    trial: F,
) -> SimulationReport
where
    F: Fn(&mut RandomStream, &mut [f64]) + Sync,
{
    let k = names.len();
    let base = RandomStream::base(seed);
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Moments::new(k);
            let mut out = vec![0.0; k];
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut stream = RandomStream::from_base(&base, i);
                out.iter_mut().for_each(|x| *x = 0.0);
                trial(&mut stream, &mut out);
                acc.push(&out);
            }
            acc
        })
        .collect();
    let total = parts.iter().fold(Moments::new(k), Moments::merge);
    let nt = trials as f64;
    let metrics = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let mean = total.sum[i] / nt;
            let std_error = if trials > 1 {
                let var = ((total.sum_sq[i] - nt * mean * mean) / (nt - 1.0)).max(0.0);
                (var / nt).sqrt()
            } else {
                0.0
            };
            Estimate {
                name,
                mean,
                std_error,
            }
        })
        .collect();
    SimulationReport { trials, metrics }
}

pub const SIMULATE_METRICS: [&str; 10] = [
    "colluder_win_prob",
    "honest_win_prob",
    "no_sale_prob",
    "colluder_surplus",
    "honest_surplus",
    "seller_revenue",
    "proposer_revenue",
    "censor_frequency",
    "bribe_paid",
    "total_tip",
];

/// Plays the equilibrium `trials` times. `honest_surplus` is per honest bidder;
/// `total_tip` counts every posted tip whether or not it was censored.
pub fn simulate(
    config: &AuctionConfig,
    sol: &EquilibriumSolution,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if trials < 1 {
        return Err(invalid("need at least one trial"));
    }
    // validates config against sol once, outside the hot loop
    let probe: Vec<f64> = std::iter::once(0.0)
        .chain(std::iter::repeat_n(0.0, config.n))
        .collect();
    crate::game::play_game(config, sol, &probe)?;

    let n = config.n;
    let names = SIMULATE_METRICS.iter().map(|s| s.to_string()).collect();
    Ok(run_trials(names, trials, seed, |stream, out| {
        let mut values = Vec::with_capacity(n + 1);
        values.push(config.colluder.sample(stream));
        for _ in 0..n {
            values.push(config.honest.sample(stream));
        }
        let g = play_unchecked(config, sol, &values, CensorMode::Equilibrium);
        match g.winner {
            Some(COLLUDER) => out[0] = 1.0,
            Some(_) => out[1] = 1.0,
            None => out[2] = 1.0,
        }
        out[3] = g.surplus[COLLUDER];
        out[4] = g.surplus[1..].iter().sum::<f64>() / n as f64;
        out[5] = g.seller_revenue;
        out[6] = g.proposer_revenue;
        out[7] = if g.bribed { 1.0 } else { 0.0 };
        out[8] = g.bribe_paid;
        out[9] = g.total_tip();
    }))
}

/// Plain second-price auction among `n_total` bidders with law `F` and reserve `r`.
///
/// Metrics: `seller_revenue`, `no_sale_prob`, `mean_surplus` (per bidder), then
/// `win_prob_<i>` and `surplus_<i>` for each bidder.
pub fn baseline_spa(
    n_total: usize,
    dist: ValueDistribution,
    reserve: f64,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if trials < 1 {
        return Err(invalid("need at least one trial"));
    }
    if n_total < 1 {
        return Err(invalid("need at least one bidder"));
    }
    if !(reserve >= 0.0 && reserve.is_finite()) {
        return Err(invalid(format!(
            "reserve must be a nonnegative finite number, got {reserve}"
        )));
    }
    let mut names = vec![
        "seller_revenue".to_string(),
        "no_sale_prob".into(),
        "mean_surplus".into(),
    ];
    names.extend((0..n_total).map(|i| format!("win_prob_{i}")));
    names.extend((0..n_total).map(|i| format!("surplus_{i}")));
    Ok(run_trials(names, trials, seed, |stream, out| {
        let bids: Vec<(usize, f64)> = (0..n_total).map(|i| (i, dist.sample(stream))).collect();
        match settle_auction(&bids, reserve) {
            (Some(w), price) => {
                let surplus = bids[w].1 - price;
                out[0] = price;
                out[2] = surplus / n_total as f64;
                out[3 + w] = 1.0;
                out[3 + n_total + w] = surplus;
            }
            (None, _) => out[1] = 1.0,
        }
    }))
}

/// Bidder 0's expected surplus with one honest bidder, by a midpoint rule on a
/// `grid x grid` lattice of `(v0, v1)`. Independent of the game engine: the
/// colluder bribes iff `t(v1) <= v0 - r` and then wins alone at price `r`.
pub fn colluder_surplus_oracle(sol: &EquilibriumSolution, grid: usize) -> Result<f64> {
    if sol.n() != 1 {
        return Err(invalid("the surplus oracle covers one honest bidder"));
    }
    if grid < 1 {
        return Err(invalid("grid must be positive"));
    }
    let (f0, f1, r) = (sol.colluder(), sol.honest(), sol.reserve());
    let m = sol.bribe_rule().multiplier;
    let h0 = f0.upper() / grid as f64;
    let h1 = f1.upper() / grid as f64;
    // (cost, weight) per honest cell, sorted by cost so the inner loop can stop early
    let mut cells: Vec<(f64, f64)> = (0..grid)
        .map(|j| {
            let v1 = (j as f64 + 0.5) * h1;
            (m * sol.tip(v1), f1.pdf(v1) * h1)
        })
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    for i in 0..grid {
        let v0 = (i as f64 + 0.5) * h0;
        let w0 = f0.pdf(v0) * h0;
        let budget = v0 - r;
        let mut inner = 0.0;
        for &(cost, w1) in &cells {
            if cost > budget {
                break;
            }
            inner += (budget - cost) * w1;
        }
        total += w0 * inner;
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureRow {
    pub n: usize,
    pub v_lo: f64,
    pub total_tip: f64,
    /// Why the row holds no numbers, or a failed cross-check.
    pub flag: Option<String>,
}

/// Threshold and expected total tip for each `n` in `[n_min, n_max]`.
/// Laws for which the general solver refuses a given `n` yield a flagged `NaN` row.
pub fn figure_data(n_min: usize, n_max: usize, dist: ValueDistribution) -> Result<Vec<FigureRow>> {
    if n_min < 2 || n_min > n_max {
        return Err(invalid(format!(
            "need 2 <= n_min <= n_max, got [{n_min}, {n_max}]"
        )));
    }
    let mut rows = Vec::with_capacity(n_max - n_min + 1);
    for n in n_min..=n_max {
        if dist == ValueDistribution::uniform() {
            let sol = solve_uniform_n(n)?;
            let total = expected_total_tip(&sol);
            let mut flag = None;
            let from_mean = n as f64 * sol.mean_tip();
            if (total - from_mean).abs() > 1e-12 {
                flag = Some(format!(
                    "closed form {total} disagrees with n*E[t] = {from_mean}"
                ));
            }
            rows.push(FigureRow {
                n,
                v_lo: sol.threshold(),
                total_tip: total,
                flag,
            });
            continue;
        }
        match solve_general_n(dist, n) {
            Ok(sol) => rows.push(FigureRow {
                n,
                v_lo: sol.threshold(),
                total_tip: expected_total_tip(&sol),
                flag: None,
            }),
            Err(Error::Assumption { max_ratio, .. }) => rows.push(FigureRow {
                n,
                v_lo: f64::NAN,
                total_tip: f64::NAN,
                flag: Some(format!("integral bound fails: max n*S(v)/v = {max_ratio}")),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}
