//! Batch runner: one JSON config in, one CSV plus `summary.txt` out.
//!
//! Every run is computed in memory before anything touches the output
//! directory, so a bad config or a solver failure leaves no files behind.

pub mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use censorship_auction::equilibrium::{
    bounds_report, expected_total_tip, solve, solve_general_n_unchecked, solve_multi_block,
    EquilibriumSolution,
};
use censorship_auction::game::bribe_decision;
use censorship_auction::montecarlo::{
    baseline_spa, colluder_surplus_oracle, figure_data, simulate,
};
use censorship_auction::multiproposer::{simulate_multiproposer, MultiProposerConfig};
use censorship_auction::verification::{
    foc_residual, verify_bidder0_subsets, verify_honest_br, verify_schedule_br, FD_TOLERANCE,
    MAX_SUBSET_BIDDERS,
};
use censorship_auction::{
    censorship_resistance, AuctionConfig, BoardSpec, RandomStream, SimulationReport, TipOffer,
};
use clap::ValueEnum;
use serde::de::DeserializeOwned;
use thiserror::Error;

use config::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Solve,
    Simulate,
    Baseline,
    Figures,
    Verify,
    Bounds,
    Multiproposer,
    Phi,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Simulate => "simulate",
            Command::Baseline => "baseline",
            Command::Figures => "figures",
            Command::Verify => "verify",
            Command::Bounds => "bounds",
            Command::Multiproposer => "multiproposer",
            Command::Phi => "phi",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    ParseConfig(#[from] serde_json::Error),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("solver failed: {0}")]
    Solver(censorship_auction::Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ReadConfig { .. } => 3,
            CliError::ParseConfig(_) => 4,
            CliError::Invalid(_) => 5,
            CliError::Solver(_) => 6,
            CliError::Output { .. } => 7,
        }
    }
}

impl From<censorship_auction::Error> for CliError {
    fn from(e: censorship_auction::Error) -> Self {
        match e {
            censorship_auction::Error::InvalidInput(msg) => CliError::Invalid(msg),
            other => CliError::Solver(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Everything a run produces, not yet written anywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub csv_name: String,
    pub csv: String,
    pub summary: String,
    /// Printed to stdout by the binary.
    pub stdout: String,
}

impl RunOutput {
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let io = |path: PathBuf| move |source| CliError::Output { path, source };
        std::fs::create_dir_all(dir).map_err(io(dir.to_path_buf()))?;
        let csv_path = dir.join(&self.csv_name);
        std::fs::write(&csv_path, &self.csv).map_err(io(csv_path.clone()))?;
        let summary_path = dir.join("summary.txt");
        std::fs::write(&summary_path, &self.summary).map_err(io(summary_path.clone()))?;
        Ok(())
    }
}

/// Float as CSV field: 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

fn report_csv(report: &SimulationReport) -> String {
    let rows: Vec<Vec<String>> = report
        .metrics
        .iter()
        .map(|e| vec![e.name.clone(), fmt_f64(e.mean), fmt_f64(e.std_error)])
        .collect();
    to_csv(&["name", "estimate", "std_error"], &rows)
}

fn report_summary(title: &str, report: &SimulationReport) -> String {
    let mut s = format!("{title}\ntrials: {}\n", report.trials);
    for e in &report.metrics {
        let _ = writeln!(s, "{:<20} {:>12.6} +/- {:.6}", e.name, e.mean, e.std_error);
    }
    s
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < 1 {
        return Err(CliError::Invalid("trials must be at least 1".into()));
    }
    Ok(())
}

pub fn read_config(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

/// Runs `command` on the JSON document `text`. `seed` overrides the config's seed.
pub fn run(command: Command, text: &str, seed: Option<u64>) -> Result<RunOutput> {
    match command {
        Command::Solve => run_solve(parse(text)?),
        Command::Simulate => {
            let mut c: SimulateConfig = parse(text)?;
            c.seed = seed.unwrap_or(c.seed);
            run_simulate(c)
        }
        Command::Baseline => {
            let mut c: BaselineConfig = parse(text)?;
            c.seed = seed.unwrap_or(c.seed);
            run_baseline(c)
        }
        Command::Figures => run_figures(parse(text)?),
        Command::Verify => {
            let mut c: VerifyConfig = parse(text)?;
            c.seed = seed.unwrap_or(c.seed);
            run_verify(c)
        }
        Command::Bounds => run_bounds(parse(text)?),
        Command::Multiproposer => {
            let mut c: MultiProposerRunConfig = parse(text)?;
            c.seed = seed.unwrap_or(c.seed);
            run_multiproposer(c)
        }
        Command::Phi => run_phi(parse(text)?),
    }
}

/// Reads `config`, runs, and writes `<command>.csv` and `summary.txt` under `out`.
pub fn run_to_dir(
    command: Command,
    config: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<RunOutput> {
    let text = read_config(config)?;
    let output = run(command, &text, seed)?;
    output.write_to(out)?;
    Ok(output)
}

struct Game<'a> {
    n: usize,
    reserve: f64,
    honest: &'a DistConfig,
    colluder: &'a DistConfig,
    board: &'a BoardConfig,
    unchecked: bool,
}

fn solve_game(g: Game<'_>) -> Result<(AuctionConfig, EquilibriumSolution)> {
    let honest = g.honest.build()?;
    let colluder = g.colluder.build()?;
    let board = g.board.build()?;
    let sol = match board {
        BoardSpec::ConcurrentProposers { .. } => {
            return Err(CliError::Invalid(
                "concurrent boards are run with the multiproposer command".into(),
            ))
        }
        BoardSpec::SequentialBlocks { m } if m >= 2 || g.n >= 2 => {
            if !honest.is_uniform()
                || honest.upper() != 1.0
                || !colluder.is_uniform()
                || g.reserve != 0.0
            {
                return Err(CliError::Invalid(
                    "sequential boards are solved for U[0,1] honest bidders, a uniform colluder and no reserve".into(),
                ));
            }
            solve_multi_block(g.n, m, colluder.upper())?
        }
        _ if g.unchecked && g.n >= 2 => {
            if g.reserve != 0.0 || colluder != censorship_auction::ValueDistribution::uniform() {
                return Err(CliError::Invalid(
                    "unchecked solves need a U[0,1] colluder and no reserve".into(),
                ));
            }
            solve_general_n_unchecked(honest, g.n)?
        }
        _ => solve(g.n, honest, colluder, g.reserve)?,
    };
    let config = AuctionConfig {
        n: g.n,
        reserve: g.reserve,
        honest,
        colluder,
        board,
    };
    config.validate()?;
    Ok((config, sol))
}

fn solution_summary(sol: &EquilibriumSolution) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind: {:?}", sol.kind());
    let _ = writeln!(s, "honest bidders: {}", sol.n());
    let _ = writeln!(s, "reserve: {}", sol.reserve());
    let _ = writeln!(s, "bribe multiplier: {}", sol.bribe_rule().multiplier);
    let _ = writeln!(s, "threshold v_lo: {:.17}", sol.threshold());
    let _ = writeln!(s, "mean tip: {:.17}", sol.mean_tip());
    let _ = writeln!(s, "expected total tip: {:.17}", expected_total_tip(sol));
    let _ = writeln!(s, "certified: {}", sol.is_certified());
    s
}

fn run_solve(c: SolveConfig) -> Result<RunOutput> {
    if c.grid < 2 {
        return Err(CliError::Invalid("grid needs at least two points".into()));
    }
    let (_, sol) = solve_game(Game {
        n: c.n,
        reserve: c.reserve,
        honest: &c.honest,
        colluder: &c.colluder,
        board: &c.board,
        unchecked: c.unchecked,
    })?;
    let upper = sol.honest().upper();
    let rows: Vec<Vec<String>> = (0..c.grid)
        .map(|i| {
            let v = upper * i as f64 / (c.grid - 1) as f64;
            vec![fmt_f64(v), fmt_f64(sol.tip(v))]
        })
        .collect();
    let summary = solution_summary(&sol);
    Ok(RunOutput {
        csv_name: "solve.csv".into(),
        csv: to_csv(&["v", "tip"], &rows),
        stdout: summary.clone(),
        summary,
    })
}

fn run_simulate(c: SimulateConfig) -> Result<RunOutput> {
    check_trials(c.trials)?;
    let (config, sol) = solve_game(Game {
        n: c.n,
        reserve: c.reserve,
        honest: &c.honest,
        colluder: &c.colluder,
        board: &c.board,
        unchecked: c.unchecked,
    })?;
    let report = simulate(&config, &sol, c.trials, c.seed)?;
    let mut summary = report_summary(&format!("simulate (seed {})", c.seed), &report);
    let _ = writeln!(
        summary,
        "expected total tip (solver): {:.17}",
        expected_total_tip(&sol)
    );
    if sol.n() == 1 {
        let oracle = colluder_surplus_oracle(&sol, 2000)?;
        let _ = writeln!(summary, "colluder surplus by 2-D quadrature: {oracle:.17}");
    }
    summary.push_str(&solution_summary(&sol));
    Ok(RunOutput {
        csv_name: "simulate.csv".into(),
        csv: report_csv(&report),
        stdout: summary.clone(),
        summary,
    })
}

fn run_baseline(c: BaselineConfig) -> Result<RunOutput> {
    check_trials(c.trials)?;
    let dist = c.dist.build()?;
    let report = baseline_spa(c.bidders, dist, c.reserve, c.trials, c.seed)?;
    let summary = report_summary(
        &format!("baseline second-price auction (seed {})", c.seed),
        &report,
    );
    Ok(RunOutput {
        csv_name: "baseline.csv".into(),
        csv: report_csv(&report),
        stdout: summary.clone(),
        summary,
    })
}

fn run_figures(c: FiguresConfig) -> Result<RunOutput> {
    let dist = c.dist.build()?;
    let rows = figure_data(c.n_min, c.n_max, dist)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n.to_string(), fmt_f64(r.v_lo), fmt_f64(r.total_tip)])
        .collect();
    let mut summary = format!(
        "figure data for {dist:?}, n in [{}, {}]\n",
        c.n_min, c.n_max
    );
    let flagged: Vec<_> = rows.iter().filter(|r| r.flag.is_some()).collect();
    if flagged.is_empty() {
        summary.push_str("no flagged rows\n");
    }
    for r in flagged {
        let _ = writeln!(
            summary,
            "n = {}: {}",
            r.n,
            r.flag.as_deref().unwrap_or_default()
        );
    }
    Ok(RunOutput {
        csv_name: "figures.csv".into(),
        csv: to_csv(&["n", "v_lo", "total_tip"], &csv_rows),
        stdout: summary.clone(),
        summary,
    })
}

fn run_verify(c: VerifyConfig) -> Result<RunOutput> {
    if c.v_grid < 2 || c.t_grid < 2 {
        return Err(CliError::Invalid(
            "v_grid and t_grid need at least two points".into(),
        ));
    }
    if let Some(d) = c.perturb {
        if !d.is_finite() {
            return Err(CliError::Invalid(format!(
                "perturb must be finite, got {d}"
            )));
        }
    }
    if c.subset_instances > 0 && c.n > MAX_SUBSET_BIDDERS {
        return Err(CliError::Invalid(format!(
            "subset enumeration is capped at {MAX_SUBSET_BIDDERS} bidders"
        )));
    }
    let (config, sol) = solve_game(Game {
        n: c.n,
        reserve: c.reserve,
        honest: &c.honest,
        colluder: &c.colluder,
        board: &c.board,
        unchecked: c.unchecked,
    })?;
    // (check, max_gain, tolerance, pass, detail)
    let mut checks: Vec<(&str, f64, f64, bool, String)> = Vec::new();
    let mut push = |check, gain, tol, pass, detail: &str| {
        checks.push((check, gain, tol, pass, detail.to_string()))
    };

    let br = verify_honest_br(&sol, c.v_grid, c.t_grid)?;
    push(
        "honest_br",
        br.max_gain,
        br.tolerance,
        br.passed(),
        &br.argmax,
    );

    let upper = sol.honest().upper();
    let mut foc_worst: f64 = 0.0;
    for i in 0..c.v_grid {
        let v = upper * i as f64 / (c.v_grid - 1) as f64;
        // the FOC only binds where the tip is interior
        if sol.tip(v) > censorship_auction::verification::FD_STEP {
            foc_worst = foc_worst.max(foc_residual(v, &sol)?.abs());
        }
    }
    push(
        "foc",
        foc_worst,
        FD_TOLERANCE,
        foc_worst <= FD_TOLERANCE,
        "",
    );

    if let Some(d) = c.perturb {
        let rep = verify_schedule_br(&sol, &sol.perturbed(d), c.v_grid, c.t_grid)?;
        // passes when the shifted schedule is caught
        push(
            "verifier_power",
            rep.max_gain,
            rep.tolerance,
            rep.max_gain > rep.tolerance,
            &rep.argmax,
        );
    }

    if c.subset_instances > 0 {
        let mut worst = f64::NEG_INFINITY;
        let mut checked = 0u64;
        for i in 0..c.subset_instances {
            let mut s = RandomStream::new(c.seed, i);
            let v0 = config.colluder.sample(&mut s);
            let values: Vec<f64> = (0..c.n).map(|_| config.honest.sample(&mut s)).collect();
            let tips: Vec<f64> = values.iter().map(|&v| sol.tip(v)).collect();
            if !bribe_decision(v0 - c.reserve, &tips, 1.0).bribe {
                continue;
            }
            checked += 1;
            let rep = verify_bidder0_subsets(&tips, &values, v0, c.reserve)?;
            worst = worst.max(rep.best_payoff - rep.full_payoff);
        }
        let gain = if checked == 0 { 0.0 } else { worst };
        push(
            "subset_buyout",
            gain,
            0.0,
            gain <= 0.0,
            &format!("{checked} bribing instances"),
        );
    }
    let mut summary = String::new();
    let mut rows = Vec::new();
    for (check, gain, tol, pass, detail) in checks {
        rows.push(vec![
            check.to_string(),
            fmt_f64(gain),
            fmt_f64(tol),
            pass.to_string(),
        ]);
        let verdict = if pass { "PASS" } else { "FAIL" };
        let _ = writeln!(
            summary,
            "{check}: max_gain {gain:.3e} (tolerance {tol:.1e}) {verdict} {detail}"
        );
    }
    summary.push_str(&solution_summary(&sol));
    Ok(RunOutput {
        csv_name: "verify.csv".into(),
        csv: to_csv(&["check", "max_gain", "tolerance", "pass"], &rows),
        stdout: summary.clone(),
        summary,
    })
}

fn run_bounds(c: BoundsConfig) -> Result<RunOutput> {
    let report = bounds_report(c.n_min, c.n_max)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.threshold),
                fmt_f64(r.threshold_pow),
                fmt_f64(r.inv_n),
                fmt_f64(r.inv_sqrt_n),
                r.lower_holds.to_string(),
                r.upper_holds.to_string(),
            ]
        })
        .collect();
    let show = |x: Option<usize>| x.map_or("never".to_string(), |n| n.to_string());
    let failures: Vec<String> = report
        .rows
        .iter()
        .filter(|r| !r.upper_holds)
        .map(|r| r.n.to_string())
        .collect();
    let mut summary = format!(
        "bounds 1/n <= v_lo^n <= 1/sqrt(n) over [{}, {}]\n",
        c.n_min, c.n_max
    );
    let _ = writeln!(
        summary,
        "lower bound holds from n = {} on",
        show(report.lower_from)
    );
    let _ = writeln!(
        summary,
        "upper bound holds from n = {} on",
        show(report.upper_from)
    );
    let _ = writeln!(summary, "both hold from n = {} on", show(report.both_from));
    if !failures.is_empty() {
        let _ = writeln!(
            summary,
            "upper bound fails at {} values of n, first n = {}",
            failures.len(),
            failures[0]
        );
    }
    Ok(RunOutput {
        csv_name: "bounds.csv".into(),
        csv: to_csv(
            &[
                "n",
                "v_lo",
                "v_lo_pow_n",
                "inv_n",
                "inv_sqrt_n",
                "lower_holds",
                "upper_holds",
            ],
            &rows,
        ),
        stdout: summary.clone(),
        summary,
    })
}

fn run_multiproposer(c: MultiProposerRunConfig) -> Result<RunOutput> {
    check_trials(c.trials)?;
    let config = MultiProposerConfig {
        m: c.m,
        n: c.n,
        colluder: c.colluder.build()?,
        honest: c.honest.build()?,
    };
    let report = simulate_multiproposer(&config, c.trials, c.seed)?;
    let summary = report_summary(
        &format!("{} concurrent proposers (seed {})", c.m, c.seed),
        &report,
    );
    Ok(RunOutput {
        csv_name: "multiproposer.csv".into(),
        csv: report_csv(&report),
        stdout: summary.clone(),
        summary,
    })
}

fn run_phi(c: PhiConfig) -> Result<RunOutput> {
    let board = c.board.build()?;
    let offer = match (c.t, c.shared, c.sole) {
        (Some(t), None, None) => TipOffer::Flat { t },
        (None, Some(shared), Some(sole)) => TipOffer::conditional(shared, sole)?,
        _ => {
            return Err(CliError::Invalid(
                "give either t, or both shared and sole".into(),
            ))
        }
    };
    let phi = censorship_resistance(board, offer)?;
    let csv = to_csv(
        &["board", "phi"],
        &[vec![format!("{board:?}"), fmt_f64(phi)]],
    );
    Ok(RunOutput {
        csv_name: "phi.csv".into(),
        csv,
        summary: format!("censorship resistance of {offer:?} on {board:?}: {phi:?}\n"),
        stdout: format!("{phi:?}\n"),
    })
}
