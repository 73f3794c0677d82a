//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::Instant;

use censorship_auction::equilibrium::{
    bounds_report, expected_total_tip, solve_general_n, solve_multi_block, solve_two_bidder,
    solve_uniform_n, threshold_residual,
};
use censorship_auction::montecarlo::{baseline_spa, colluder_surplus_oracle, simulate};
use censorship_auction::multiproposer::{
    briber_payoff, censor_prob, indifference_residual, optimal_bribe, simulate_multiproposer,
    ConditionalTip, MultiProposerConfig,
};
use censorship_auction::verification::{
    verify_bidder0_subsets, verify_honest_br, verify_schedule_br,
};
use censorship_auction::{
    censorship_resistance, AuctionConfig, BoardSpec, Estimate, RandomStream, SimulationReport,
    TipOffer, UniformSource, ValueDistribution,
};
use censorship_auction_cli::{run, Command};

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.lines
            .push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
    }

    fn near(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check(
            (got - want).abs() <= tol,
            format!("{label}: {got:.6} vs {want:.6} (+/- {tol})"),
        );
    }

    fn note(&mut self, text: String) {
        self.lines.push(format!("     {text}"));
    }
}

fn uniform_game(n: usize, r: f64) -> AuctionConfig {
    AuctionConfig {
        n,
        reserve: r,
        honest: ValueDistribution::uniform(),
        colluder: ValueDistribution::uniform(),
        board: BoardSpec::SingleBlock,
    }
}

fn est<'a>(rep: &'a SimulationReport, name: &str) -> &'a Estimate {
    rep.get(name).unwrap()
}

fn c01() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let sol = solve_two_bidder(ValueDistribution::uniform(), 0.0).unwrap();
    let rep = simulate(&uniform_game(1, 0.0), &sol, 1_000_000, 2024).unwrap();
    let oracle = colluder_surplus_oracle(&sol, 4000).unwrap();
    let secs = start.elapsed().as_secs_f64();
    o.near("bidder 0 wins", rep.mean("colluder_win_prob"), 0.75, 0.005);
    o.near("bidder 1 wins", rep.mean("honest_win_prob"), 0.25, 0.005);
    o.near(
        "bidder 1 surplus",
        rep.mean("honest_surplus"),
        1.0 / 12.0,
        0.003,
    );
    o.check(
        rep.mean("seller_revenue") == 0.0,
        format!("seller revenue exactly 0: {}", rep.mean("seller_revenue")),
    );
    o.near(
        "proposer revenue",
        rep.mean("proposer_revenue"),
        0.25,
        0.003,
    );
    o.near(
        "bidder 0 surplus vs double-integral oracle",
        rep.mean("colluder_surplus"),
        oracle,
        0.003,
    );
    o.note(format!(
        "oracle {oracle:.6} (7/24 = {:.6}); published figure 13/48 = {:.6}",
        7.0 / 24.0,
        13.0 / 48.0
    ));
    o.check(secs < 30.0, format!("wall time {secs:.2}s < 30s"));
    o
}

fn c02() -> Outcome {
    let mut o = Outcome::new();
    let r = 0.25;
    let sol = solve_two_bidder(ValueDistribution::uniform(), r).unwrap();
    let rep = simulate(&uniform_game(1, r), &sol, 1_000_000, 2025).unwrap();
    o.near(
        "bidder 0 wins",
        rep.mean("colluder_win_prob"),
        (1.0 - r) * (1.0 - (0.5 - r) * (0.5 - r)),
        0.005,
    );
    o.near(
        "bidder 1 wins",
        rep.mean("honest_win_prob"),
        (1.0 - 2.0 * r) * (r / 2.0 + 0.25),
        0.005,
    );
    o.near(
        "seller revenue",
        rep.mean("seller_revenue"),
        r * (1.0 - r * r),
        0.003,
    );
    o.near(
        "proposer revenue",
        rep.mean("proposer_revenue"),
        0.25 * (1.0 - 2.0 * r).powi(2),
        0.003,
    );
    o.note(format!(
        "direct integration of the strategies gives bidder 0 {:.6}, bidder 1 {:.6}, no sale {:.6}",
        0.6875,
        0.25,
        r * r
    ));
    o
}

fn c03() -> Outcome {
    let mut o = Outcome::new();
    let rep = baseline_spa(2, ValueDistribution::uniform(), 0.0, 1_000_000, 2026).unwrap();
    o.near("revenue", rep.mean("seller_revenue"), 1.0 / 3.0, 0.003);
    o.near("bidder 0 surplus", rep.mean("surplus_0"), 1.0 / 6.0, 0.003);
    o.near("bidder 1 surplus", rep.mean("surplus_1"), 1.0 / 6.0, 0.003);
    o
}

fn c04() -> Outcome {
    let mut o = Outcome::new();
    let (mut worst_res, mut worst_slack, mut slack_n) = (0.0f64, f64::NEG_INFINITY, 0);
    for n in 2..=200 {
        let sol = solve_uniform_n(n).unwrap();
        worst_res = worst_res.max(threshold_residual(n, sol.threshold()).abs());
        for i in 0..=10_000 {
            let v = i as f64 / 10_000.0;
            let slack = sol.tip(v) - v / n as f64;
            if slack > worst_slack {
                worst_slack = slack;
                slack_n = n;
            }
        }
    }
    o.check(
        worst_res <= 1e-10,
        format!("max |threshold residual| over n in [2, 200]: {worst_res:.3e}"),
    );
    o.check(
        worst_slack <= 0.0,
        format!("max t(v) - v/n: {worst_slack:.3e} (n = {slack_n})"),
    );
    o
}

fn c05() -> Outcome {
    let mut o = Outcome::new();
    let rep = bounds_report(2, 200).unwrap();
    let fails: Vec<usize> = rep
        .rows
        .iter()
        .filter(|r| !r.upper_holds)
        .map(|r| r.n)
        .collect();
    o.check(
        fails.is_empty(),
        format!(
            "upper bound v_lo^n <= 1/sqrt(n) on [2, 200]: fails at {} values, first n = {:?}",
            fails.len(),
            fails.first()
        ),
    );
    o.check(
        rep.lower_from.is_some(),
        format!(
            "lower bound 1/n <= v_lo^n holds from n = {:?} through 200",
            rep.lower_from
        ),
    );
    let last = rep.rows.last().unwrap();
    o.note(format!(
        "n = 200: v_lo^n = {:.6}, 1/sqrt(n) = {:.6}",
        last.threshold_pow, last.inv_sqrt_n
    ));
    o
}

fn c06() -> Outcome {
    let mut o = Outcome::new();
    for n in [2, 5, 10] {
        let closed = solve_uniform_n(n).unwrap();
        let general = solve_general_n(ValueDistribution::uniform(), n).unwrap();
        let sup = (0..1001)
            .map(|i| i as f64 / 1000.0)
            .map(|v| (closed.tip(v) - general.tip(v)).abs())
            .fold(0.0, f64::max);
        o.check(
            sup <= 1e-8,
            format!("n = {n}: sup |t_closed - t_general| = {sup:.3e}"),
        );
    }
    o
}

fn c07() -> Outcome {
    let mut o = Outcome::new();
    let totals: Vec<f64> = (2..=50)
        .map(|n| expected_total_tip(&solve_uniform_n(n).unwrap()))
        .collect();
    o.check(
        totals.windows(2).all(|w| w[1] < w[0]),
        "v_lo^n/(n-1) strictly decreasing on [2, 50]".into(),
    );
    for n in [2, 5, 10] {
        let sol = solve_uniform_n(n).unwrap();
        let rep = simulate(&uniform_game(n, 0.0), &sol, 100_000, 70 + n as u64).unwrap();
        let e = est(&rep, "total_tip");
        let want = expected_total_tip(&sol);
        o.check(
            (e.mean - want).abs() <= 4.0 * e.std_error,
            format!(
                "n = {n}: MC total tip {:.6} vs {want:.6} ({:.2} SE)",
                e.mean,
                (e.mean - want) / e.std_error
            ),
        );
    }
    o
}

fn c08() -> Outcome {
    let mut o = Outcome::new();
    let mut failures = 0;
    for i in 0..1000u64 {
        let mut s = RandomStream::new(8, i);
        let n = 2 + (s.next_uniform() * 7.0) as usize;
        let values: Vec<f64> = (0..n).map(|_| s.next_uniform()).collect();
        let tips: Vec<f64> = values
            .iter()
            .map(|v| v / n as f64 * s.next_uniform())
            .collect();
        let v0 = tips.iter().sum::<f64>() + s.next_uniform();
        if !verify_bidder0_subsets(&tips, &values, v0, 0.0)
            .unwrap()
            .full_is_optimal(n)
        {
            failures += 1;
        }
    }
    o.check(
        failures == 0,
        format!("full buy-out optimal in {}/1000 instances", 1000 - failures),
    );
    o
}

fn c09() -> Outcome {
    let mut o = Outcome::new();
    let one = solve_two_bidder(ValueDistribution::uniform(), 0.0).unwrap();
    let rep = verify_honest_br(&one, 201, 2001).unwrap();
    o.check(
        rep.max_gain <= 1e-6,
        format!("n = 1: max gain {:.3e} <= 1e-6", rep.max_gain),
    );
    let mut sols = vec![one];
    for n in [2, 3] {
        let sol = solve_uniform_n(n).unwrap();
        let rep = verify_honest_br(&sol, 201, 2001).unwrap();
        o.check(
            rep.max_gain <= 1e-3,
            format!("n = {n}: max gain {:.3e} <= 1e-3", rep.max_gain),
        );
        sols.push(sol);
    }
    for sol in &sols {
        let rep = verify_schedule_br(sol, &sol.perturbed(0.05), 201, 2001).unwrap();
        o.check(
            rep.max_gain > 1e-3,
            format!(
                "n = {}: schedule + 0.05 detected, max gain {:.3e} > 1e-3 at {}",
                sol.n(),
                rep.max_gain,
                rep.argmax
            ),
        );
    }
    o
}

fn c10() -> Outcome {
    let mut o = Outcome::new();
    let base = solve_uniform_n(10).unwrap();
    let mut bands = Vec::new();
    for m in [1u32, 2, 5] {
        let kappa = m as f64 + 1.0;
        let sol = solve_multi_block(10, m, kappa).unwrap();
        let same = (0..=10_000)
            .map(|i| i as f64 / 10_000.0)
            .all(|v| sol.tip(v) == base.tip(v));
        o.check(
            same,
            format!("m = {m}: tipping schedule identical to the single-block one"),
        );
        let cfg = AuctionConfig {
            n: 10,
            reserve: 0.0,
            honest: ValueDistribution::uniform(),
            colluder: ValueDistribution::uniform_scaled(kappa).unwrap(),
            board: BoardSpec::SequentialBlocks { m },
        };
        let rep = simulate(&cfg, &sol, 100_000, 100 + m as u64).unwrap();
        let e = est(&rep, "censor_frequency").clone();
        o.note(format!(
            "m = {m}: censor frequency {:.5} +/- {:.5}",
            e.mean, e.std_error
        ));
        bands.push(e);
    }
    for w in bands.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        o.check(
            a.mean > b.mean && a.mean - 3.0 * a.std_error > b.mean + 3.0 * b.std_error,
            format!("{:.5} > {:.5} with disjoint 3 SE bands", a.mean, b.mean),
        );
    }
    o
}

fn c11() -> Outcome {
    let mut o = Outcome::new();
    let cfg = MultiProposerConfig {
        m: 2,
        n: 1,
        colluder: ValueDistribution::uniform(),
        honest: ValueDistribution::uniform(),
    };
    let rep = simulate_multiproposer(&cfg, 1_000_000, 11).unwrap();
    o.check(
        rep.mean("censor_frequency") == 0.0,
        format!("censor frequency {}", rep.mean("censor_frequency")),
    );
    o.near("revenue", rep.mean("seller_revenue"), 1.0 / 3.0, 0.005);
    o.near(
        "bidder 0 surplus",
        rep.mean("colluder_surplus"),
        1.0 / 6.0,
        0.005,
    );
    o.near(
        "bidder 1 surplus",
        rep.mean("honest_surplus"),
        1.0 / 6.0,
        0.005,
    );

    let tips = [
        ConditionalTip::new(0.0, 1.0).unwrap(),
        ConditionalTip::new(0.2, 0.9).unwrap(),
    ];
    let mut worst_res: f64 = 0.0;
    let mut worst_gap = f64::NEG_INFINITY;
    for &tip in &tips {
        for m in [2u32, 3, 5] {
            for i in 0..1000 {
                let z = tip.shared + (tip.sole - tip.shared) * i as f64 / 1000.0;
                let p = censor_prob(z, tip, m).unwrap();
                worst_res = worst_res.max(indifference_residual(z, p, tip, m).abs());
            }
            for c in [0.0, 0.5, 1.0, 1.99, 2.0, 2.5, 4.5, 6.0] {
                let best = briber_payoff(c, optimal_bribe(c, tip, m).unwrap(), tip, m).unwrap();
                for i in 0..=10_000 {
                    let z = tip.shared + (tip.sole - tip.shared) * i as f64 / 10_000.0;
                    worst_gap = worst_gap.max(briber_payoff(c, z, tip, m).unwrap() - best);
                }
            }
        }
    }
    o.check(
        worst_res <= 1e-10,
        format!("max indifference residual {worst_res:.3e}"),
    );
    o.check(
        worst_gap <= 1e-9,
        format!("grid search beats the endpoint by at most {worst_gap:.3e}"),
    );
    o
}

fn c12() -> Outcome {
    let mut o = Outcome::new();
    let mut s = RandomStream::new(12, 0);
    let (mut single, mut seq, mut conc) = (true, true, true);
    for _ in 0..100 {
        let t = s.next_uniform() * 10.0;
        single &= censorship_resistance(BoardSpec::SingleBlock, TipOffer::Flat { t }).unwrap() == t;
        let m = 1 + (s.next_uniform() * 50.0) as u32;
        seq &= censorship_resistance(BoardSpec::SequentialBlocks { m }, TipOffer::Flat { t })
            .unwrap()
            == m as f64 * t;
        let k = 2 + (s.next_uniform() * 50.0) as u32;
        let sole = t + s.next_uniform() * 10.0;
        let offer = TipOffer::Conditional { shared: t, sole };
        conc &= censorship_resistance(BoardSpec::ConcurrentProposers { k }, offer).unwrap()
            == k as f64 * sole;
    }
    o.check(single, "single block: phi(t) = t".into());
    o.check(seq, "sequential: phi(t) = m t".into());
    o.check(conc, "concurrent: phi(t, T) = k T".into());
    o
}

fn c13() -> Outcome {
    let mut o = Outcome::new();
    let text = r#"{"n": 3, "reserve": 0.1, "trials": 200000, "seed": 13}"#;
    let pooled = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run(Command::Simulate, text, None).unwrap().csv)
    };
    let a = run(Command::Simulate, text, None).unwrap().csv;
    let b = run(Command::Simulate, text, None).unwrap().csv;
    o.check(a == b, "repeat run byte-identical".into());
    for threads in [1, 3, 8] {
        o.check(
            pooled(threads) == a,
            format!("{threads}-thread pool byte-identical"),
        );
    }
    o
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("two-bidder game without reserve", c01),
        ("two-bidder game with reserve 1/4", c02),
        ("second-price baseline", c03),
        ("n-bidder threshold and tip bound", c04),
        ("threshold power bounds", c05),
        ("general solver matches closed form", c06),
        ("total tip decay and MC agreement", c07),
        ("subset buy-out enumeration", c08),
        ("honest best responses and verifier power", c09),
        ("sequential blocks", c10),
        ("concurrent proposers", c11),
        ("censorship resistance identities", c12),
        ("determinism", c13),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict}  {name} ({:.1}s)",
            i + 1,
            start.elapsed().as_secs_f64()
        );
        for line in &out.lines {
            println!("    {line}");
        }
        if !out.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("all 13 criteria pass");
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
