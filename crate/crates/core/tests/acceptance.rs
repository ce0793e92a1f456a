//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use hydro_balance::config::RunConfig;
use hydro_balance::exec::Execution;
use hydro_balance::hydro::LoadCommitment;
use hydro_balance::instances::{random_day_ahead, random_scenario_inputs, rng, InstanceShape};
use hydro_balance::market::{Order, QuoteLadder, Side};
use hydro_balance::mc::fixtures::{
    flood_problem, ladder_plant, ladder_reservoir, FLOOD_HOUR, LADDER_OPERATING_POINT,
    LADDER_WATER_VALUE,
};
use hydro_balance::mc::{build_ladder, dynamic_mc, LadderSide};
use hydro_balance::milp::{
    day_ahead_model, solve_day_ahead, solve_rebalance, RebalanceProblem, SolveOptions,
};
use hydro_balance::output::run_artifacts;
use hydro_balance::pipeline::run_pipeline;
use hydro_balance::settlement::{
    average_cost, cost_imperfect, one_price_average, SettlementPrices,
};
use rand::Rng;

mod common;
use common::{enumerate_binaries, small_shape};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ladder_at_operating_point() -> Check {
    let start = Instant::now();
    let (plant, reference) = ladder_plant("p", "r", None);
    let res = ladder_reservoir(reference);
    ensure(res.water_value == LADDER_WATER_VALUE, "water value")?;
    let l =
        build_ladder(&plant, &res, &[LADDER_OPERATING_POINT], 1.0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let sell: Vec<(f64, f64)> = l
        .side(0, LadderSide::SellMore)
        .map(|e| (e.volume, e.price))
        .collect();
    let back: Vec<(f64, f64)> = l
        .side(0, LadderSide::BuyBack)
        .map(|e| (e.volume, e.price))
        .collect();
    let matches = |got: &[(f64, f64)], want: &[(f64, f64)]| {
        got.len() == want.len()
            && got
                .iter()
                .zip(want)
                .all(|(g, w)| g.0 == w.0 && (g.1 - w.1).abs() <= 0.05)
    };
    ensure(
        matches(&sell, &[(16.0, 24.2)]),
        format!("sell side {sell:?}"),
    )?;
    ensure(
        matches(&back, &[(17.0, 21.5), (20.0, 18.3), (19.0, 17.1)]),
        format!("buy-back side {back:?}"),
    )?;
    ensure(elapsed < 1.0, format!("took {elapsed:.3} s"))?;
    Ok(format!(
        "sell {sell:?}, buy-back {back:?}, {:.1} ms",
        elapsed * 1e3
    ))
}

fn spread_round_trip() -> Check {
    let mut book = QuoteLadder::flat(&[21.5], &[24.2], 100.0);
    let sold = book.clear(&Order::market(0, Side::Sell, 15.0));
    let bought = book.clear(&Order::market(0, Side::Buy, 15.0));
    ensure(
        sold.unfilled == 0.0 && bought.unfilled == 0.0,
        "book too thin",
    )?;
    let cost = bought.cash() - sold.cash();
    ensure((cost - 40.5).abs() <= 1e-9, format!("cost {cost}"))?;
    Ok(format!("round trip costs {cost} EUR"))
}

fn milp_vs_enumeration() -> Check {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let shape = small_shape(&mut r);
        let p = random_day_ahead(&mut r, shape);
        let model = day_ahead_model(&p).map_err(|e| e.to_string())?;
        let flags: Vec<usize> = model
            .index
            .flag
            .iter()
            .flatten()
            .flatten()
            .copied()
            .collect();
        ensure(
            flags.len() <= 12,
            format!("instance {k}: {} binaries", flags.len()),
        )?;
        let oracle = enumerate_binaries(&model.lp, &flags)
            .ok_or(format!("instance {k}: no feasible leaf"))?;
        let got = solve_day_ahead(&p, &SolveOptions::default())
            .map_err(|e| format!("instance {k}: {e}"))?;
        let rel = (got.objective - oracle).abs() / oracle.abs().max(1.0);
        worst = worst.max(rel);
        ensure(
            rel <= 1e-6,
            format!("instance {k}: {} vs {oracle}", got.objective),
        )?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(elapsed < 60.0, format!("took {elapsed:.1} s"))?;
    Ok(format!(
        "100 instances, worst rel. error {worst:.1e}, {elapsed:.2} s"
    ))
}

fn dominance_and_ordering() -> Check {
    let mut r = rng(102);
    let opts = SolveOptions::default();
    let mut violations = Vec::new();
    for k in 0..50 {
        let shape = InstanceShape {
            plants: r.gen_range(1..=2),
            steps: r.gen_range(1..=4),
            segments: r.gen_range(1..=2),
        };
        let inputs = random_scenario_inputs(&mut r, shape);
        ensure(inputs.quote_params.spread_frac > 0.0, "spread")?;
        let run = run_pipeline(&inputs, &opts, Execution::Sequential)
            .map_err(|e| format!("instance {k}: {e}"))?;
        let obj = |s: usize| {
            run.outcomes[s]
                .solution
                .as_ref()
                .map(|x| x.objective)
                .unwrap_or(f64::NAN)
        };
        let c = run.comparison.costs();
        let tol = 1e-6 * (1.0 + c.iter().map(|x| x.abs()).fold(0.0, f64::max));
        let (plant, port) = (obj(1), obj(3));
        if port < plant - 1e-9 * plant.abs().max(1.0) {
            violations.push(format!("{k}: portfolio {port} < plant {plant}"));
        }
        if !(c[3] <= c[2] + tol && c[2] <= c[0] + tol && c[3] <= c[1] + tol && c[1] <= c[0] + tol) {
            violations.push(format!("{k}: costs {c:?}"));
        }
    }
    ensure(violations.is_empty(), violations.join("; "))?;
    Ok("50 instances, 0 violations".into())
}

fn flood_dynamics() -> Check {
    let p = flood_problem();
    let opts = SolveOptions::default();
    let sol = solve_rebalance(&p, &opts).map_err(|e| e.to_string())?;
    let plant = dynamic_mc(&p, &sol, &opts).map_err(|e| e.to_string())?;
    let up = plant.get("upper").ok_or("no upper")?[FLOOD_HOUR];
    let down = plant.get("lower").ok_or("no lower")?[FLOOD_HOUR];
    let pp = p.as_portfolio();
    let psol = solve_rebalance(&pp, &opts).map_err(|e| e.to_string())?;
    let port = dynamic_mc(&pp, &psol, &opts)
        .map_err(|e| e.to_string())?
        .values[0][FLOOD_HOUR];
    let summary = format!("lower {down:.3}, upper {up:.3}, portfolio {port:.3} EUR/MWh");
    ensure(down <= 0.01, format!("downstream MC too high: {summary}"))?;
    ensure(
        up > LADDER_WATER_VALUE,
        format!("upstream MC not above WV: {summary}"),
    )?;
    ensure(
        down < port && port < up,
        format!("portfolio MC not between: {summary}"),
    )?;
    Ok(summary)
}

fn settlement_properties() -> Check {
    let mut r = rng(106);
    for k in 0..10_000 {
        let spot = r.gen_range(1.0..100.0);
        let prices = SettlementPrices::new(
            vec![spot],
            vec![spot + r.gen_range(0.0..30.0)],
            vec![spot - r.gen_range(0.0..spot)],
        )
        .map_err(|e| e.to_string())?;
        let (qa, qf) = (r.gen_range(0.0..200.0), r.gen_range(0.0..200.0));
        let c = cost_imperfect(qa, qf, &prices, 0);
        ensure(c >= 0.0, format!("step {k}: cost {c}"))?;
    }
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let n = r.gen_range(2..=48);
        let spot = r.gen_range(1.0..100.0);
        let sb: Vec<f64> = (0..n).map(|_| spot + r.gen_range(0.0..30.0)).collect();
        let ss: Vec<f64> = (0..n).map(|_| spot - r.gen_range(0.0..spot)).collect();
        let prices = SettlementPrices::new(vec![spot; n], sb, ss).map_err(|e| e.to_string())?;
        let mut dev: Vec<f64> = (0..n).map(|_| r.gen_range(-20.0..20.0)).collect();
        let mean = dev.iter().sum::<f64>() / n as f64;
        dev.iter_mut().for_each(|d| *d -= mean);
        let q_forc: Vec<f64> = (0..n).map(|_| r.gen_range(50.0..150.0)).collect();
        let q_act: Vec<f64> = q_forc.iter().zip(&dev).map(|(f, d)| f + d).collect();
        let a = average_cost(&q_act, &q_forc, &prices).map_err(|e| e.to_string())?;
        let b = one_price_average(&q_act, &q_forc, &prices).map_err(|e| e.to_string())?;
        worst = worst.max((a - b).abs());
        ensure((a - b).abs() <= 1e-9, format!("trace {k}: {a} vs {b}"))?;
    }
    Ok(format!(
        "10000 steps non-negative, 100 traces agree to {worst:.1e}"
    ))
}

/// Optimal objective minus the commitment revenue.
fn operating_value(p: &RebalanceProblem, opts: &SolveOptions) -> Option<f64> {
    let sol = solve_rebalance(p, opts).ok()?;
    let h = p.base.grid.step_hours();
    let revenue: f64 = p
        .commitment
        .series
        .iter()
        .map(|s| {
            s.iter()
                .zip(&p.base.prices)
                .map(|(l, x)| l * x * h)
                .sum::<f64>()
        })
        .sum();
    Some(sol.objective - revenue)
}

fn duals_vs_differences() -> Check {
    let mut r = rng(107);
    let opts = SolveOptions::default();
    let eps = 0.01;
    let mut accepted = 0;
    let mut worst: f64 = 0.0;
    let mut attempts = 0;
    while accepted < 20 {
        attempts += 1;
        ensure(
            attempts <= 2000,
            format!("only {accepted} non-degenerate cases in {attempts} attempts"),
        )?;
        let shape = InstanceShape {
            plants: r.gen_range(1..=2),
            steps: r.gen_range(1..=4),
            segments: r.gen_range(1..=3),
        };
        let base = random_day_ahead(&mut r, shape);
        let Ok(da) = solve_day_ahead(&base, &opts) else {
            continue;
        };
        let series: Vec<Vec<f64>> = da
            .generation
            .iter()
            .zip(&base.system.plants)
            .map(|(g, pl)| {
                g.iter()
                    .map(|v| (v + r.gen_range(-8.0..8.0)).clamp(pl.p_min, pl.p_max))
                    .collect()
            })
            .collect();
        let ids = base.system.plants.iter().map(|pl| pl.id.clone()).collect();
        let bid: Vec<f64> = base.prices.iter().map(|x| x * 0.9).collect();
        let ask: Vec<f64> = base.prices.iter().map(|x| x * 1.1).collect();
        let mut p = RebalanceProblem {
            commitment: LoadCommitment::plant(ids, series),
            quotes: QuoteLadder::flat(&bid, &ask, 5.0),
            wind_actual: None,
            base,
        };
        if r.gen_bool(0.5) {
            p = p.as_portfolio();
        }
        let Ok(sol) = solve_rebalance(&p, &opts) else {
            continue;
        };
        let Ok(mc) = dynamic_mc(&p, &sol, &opts) else {
            continue;
        };
        let e = r.gen_range(0..p.commitment.series.len());
        let t = r.gen_range(0..shape.steps);
        let dual = mc.values[e][t];
        let shifted = |d: f64| {
            let mut q = p.clone();
            q.commitment.series[e][t] += d;
            operating_value(&q, &opts)
        };
        let (Some(v0), Some(up), Some(down)) =
            (operating_value(&p, &opts), shifted(eps), shifted(-eps))
        else {
            continue;
        };
        let h = p.base.grid.step_hours();
        let fwd = -(up - v0) / (eps * h);
        let bwd = -(v0 - down) / (eps * h);
        // kinks show up as one-sided differences that disagree
        if (fwd - bwd).abs() > 1e-3 * fwd.abs().max(1.0) || dual.abs() < 1.0 {
            continue;
        }
        let central = -(up - down) / (2.0 * eps * h);
        let rel = (central - dual).abs() / dual.abs();
        worst = worst.max(rel);
        ensure(
            rel <= 0.05,
            format!("case {accepted}: dual {dual} vs difference {central}"),
        )?;
        accepted += 1;
    }
    Ok(format!(
        "20 cases ({attempts} drawn), worst rel. error {worst:.1e}"
    ))
}

fn demo_determinism() -> Check {
    let (cfg, src) = RunConfig::demo();
    let inputs = cfg.load_inputs(&src).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for exec in [
        Execution::Parallel,
        Execution::Parallel,
        Execution::Sequential,
    ] {
        let run = run_pipeline(&inputs, &cfg.solver, exec).map_err(|e| e.to_string())?;
        outputs.push(run_artifacts(&inputs, &run, &cfg.solver, true).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], "repeated runs differ")?;
    ensure(outputs[0] == outputs[2], "sequential run differs")?;
    let bytes: usize = outputs[0].iter().map(|a| a.bytes.len()).sum();
    Ok(format!(
        "{} files, {bytes} bytes identical across 3 runs",
        outputs[0].len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        (
            "1 bid ladder at the operating point",
            ladder_at_operating_point,
        ),
        ("2 spread round trip", spread_round_trip),
        ("3 branch and bound vs enumeration", milp_vs_enumeration),
        (
            "4 portfolio dominance and scenario ordering",
            dominance_and_ordering,
        ),
        ("5 flood marginal costs", flood_dynamics),
        ("6 settlement properties", settlement_properties),
        ("7 duals vs finite differences", duals_vs_differences),
        ("8 demo determinism", demo_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
