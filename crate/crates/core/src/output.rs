//! Report files. Everything is rendered to memory first so a failing run
//! leaves no partial output behind.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::hydro::{CascadeSystem, CommitmentMode, LoadCommitment, ScheduleSolution, TradeSeries};
use crate::io::fmt_num;
use crate::market::{write_fills_csv, write_quotes_csv, Fill, MarketError, QuoteLadder};
use crate::mc::{cascade_segment_mc, dynamic_mc, ladder_from_costs, McError, McSeries};
use crate::milp::{day_ahead_model, rebalance_model, ScheduleError, SolveOptions};
use crate::pipeline::{
    rebalance_problem, PipelineRun, Plan, RawImbalance, ScenarioInputs, WIND_ID,
};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Mc(#[from] McError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

fn table(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, OutputError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner()
        .map_err(|e| OutputError::Csv(e.into_error().into()))
}

/// `step,plant,generation_mw,discharge_m3s,reservoir_end_m3,spill_m3s`
pub fn schedule_csv(
    system: &CascadeSystem,
    sol: &ScheduleSolution,
) -> Result<Vec<u8>, OutputError> {
    let steps = sol.generation.first().map_or(0, Vec::len);
    let mut rows = Vec::new();
    for t in 0..steps {
        for (i, p) in system.plants.iter().enumerate() {
            rows.push(vec![
                t.to_string(),
                p.id.clone(),
                fmt_num(sol.generation[i][t]),
                fmt_num(sol.discharge(i, t)),
                fmt_num(sol.reservoir[i][t]),
                fmt_num(sol.spill[i][t]),
            ]);
        }
    }
    table(
        &[
            "step",
            "plant",
            "generation_mw",
            "discharge_m3s",
            "reservoir_end_m3",
            "spill_m3s",
        ],
        rows,
    )
}

/// `step,entity,load_mw`
pub fn commitment_csv(c: &LoadCommitment) -> Result<Vec<u8>, OutputError> {
    let rows = (0..c.steps()).flat_map(|t| {
        c.entities
            .iter()
            .zip(&c.series)
            .map(move |(e, s)| vec![t.to_string(), e.clone(), fmt_num(s[t])])
    });
    table(&["step", "entity", "load_mw"], rows)
}

/// `step,entity,imbalance_mw`; positive means long.
pub fn imbalance_csv(system: &CascadeSystem, raw: &RawImbalance) -> Result<Vec<u8>, OutputError> {
    let mut rows = Vec::new();
    for t in 0..raw.total.len() {
        for (p, h) in system.plants.iter().zip(&raw.hydro) {
            rows.push(vec![t.to_string(), p.id.clone(), fmt_num(h[t])]);
        }
        rows.push(vec![t.to_string(), WIND_ID.into(), fmt_num(raw.wind[t])]);
        rows.push(vec![t.to_string(), "total".into(), fmt_num(raw.total[t])]);
    }
    table(&["step", "entity", "imbalance_mw"], rows)
}

/// `step,entity,buy_mw,sell_mw`
pub fn trades_csv(trades: &[TradeSeries]) -> Result<Vec<u8>, OutputError> {
    let steps = trades.first().map_or(0, |t| t.buy.len());
    let rows = (0..steps).flat_map(|t| {
        trades.iter().map(move |tr| {
            vec![
                t.to_string(),
                tr.entity.clone(),
                fmt_num(tr.buy[t]),
                fmt_num(tr.sell[t]),
            ]
        })
    });
    table(&["step", "entity", "buy_mw", "sell_mw"], rows)
}

/// `step,entity,mc_eur_mwh`
pub fn mc_csv(mc: &McSeries) -> Result<Vec<u8>, OutputError> {
    let steps = mc.values.first().map_or(0, Vec::len);
    let rows = (0..steps).flat_map(|t| {
        mc.entities
            .iter()
            .zip(&mc.values)
            .map(move |(e, v)| vec![t.to_string(), e.clone(), fmt_num(v[t])])
    });
    table(&["step", "entity", "mc_eur_mwh"], rows)
}

/// `step,plant,delta_mw`
pub fn delta_csv(system: &CascadeSystem, delta: &[Vec<f64>]) -> Result<Vec<u8>, OutputError> {
    let steps = delta.first().map_or(0, Vec::len);
    let rows = (0..steps).flat_map(|t| {
        system
            .plants
            .iter()
            .zip(delta)
            .map(move |(p, d)| vec![t.to_string(), p.id.clone(), fmt_num(d[t])])
    });
    table(&["step", "plant", "delta_mw"], rows)
}

pub fn quotes_csv(q: &QuoteLadder) -> Result<Vec<u8>, OutputError> {
    let mut buf = Vec::new();
    write_quotes_csv(q, &mut buf)?;
    Ok(buf)
}

pub fn fills_csv(fills: &[Fill]) -> Result<Vec<u8>, OutputError> {
    let mut buf = Vec::new();
    write_fills_csv(fills, &mut buf)?;
    Ok(buf)
}

fn art(name: impl Into<String>, bytes: Vec<u8>) -> Artifact {
    Artifact {
        name: name.into(),
        bytes,
    }
}

pub fn day_ahead_artifacts(
    inputs: &ScenarioInputs,
    plan: &Plan,
) -> Result<Vec<Artifact>, OutputError> {
    Ok(vec![
        art(
            "day_ahead_schedule.csv",
            schedule_csv(&inputs.system, &plan.day_ahead)?,
        ),
        art("commitment.csv", commitment_csv(&plan.commitment)?),
    ])
}

pub fn reforecast_artifacts(
    inputs: &ScenarioInputs,
    plan: &Plan,
) -> Result<Vec<Artifact>, OutputError> {
    Ok(vec![
        art(
            "reforecast_schedule.csv",
            schedule_csv(&inputs.system, &plan.reforecast)?,
        ),
        art("imbalance.csv", imbalance_csv(&inputs.system, &plan.raw)?),
    ])
}

/// Bid ladders around the day-ahead commitment, one file per plant.
pub fn ladder_artifacts(
    inputs: &ScenarioInputs,
    plan: &Plan,
) -> Result<Vec<Artifact>, OutputError> {
    let h = inputs.grid.step_hours();
    let mut out = Vec::new();
    for (i, p) in inputs.system.plants.iter().enumerate() {
        let costs = cascade_segment_mc(&inputs.system, i, h)?;
        let ladder = ladder_from_costs(p, &costs, &plan.day_ahead.generation[i], h)?;
        let mut buf = Vec::new();
        ladder.write_csv(&mut buf)?;
        out.push(art(format!("ladder_{}.csv", p.id), buf));
    }
    Ok(out)
}

/// Schedule, trades and marginal costs of one rebalance solve.
pub fn rebalance_artifacts(
    inputs: &ScenarioInputs,
    plan: &Plan,
    quotes: &QuoteLadder,
    mode: CommitmentMode,
    sol: &ScheduleSolution,
    opts: &SolveOptions,
) -> Result<Vec<Artifact>, OutputError> {
    let tag = match mode {
        CommitmentMode::Plant => "plant",
        CommitmentMode::Portfolio => "portfolio",
    };
    let p = rebalance_problem(inputs, &plan.commitment, quotes, mode);
    let mc = dynamic_mc(&p, sol, opts)?;
    Ok(vec![
        art(
            format!("rebalance_{tag}_schedule.csv"),
            schedule_csv(&inputs.system, sol)?,
        ),
        art(
            format!("rebalance_{tag}_trades.csv"),
            trades_csv(&sol.trades)?,
        ),
        art(format!("mc_{tag}.csv"), mc_csv(&mc)?),
    ])
}

/// Every file of a full run. `raw` adds a full-precision JSON dump.
pub fn run_artifacts(
    inputs: &ScenarioInputs,
    run: &PipelineRun,
    opts: &SolveOptions,
    raw: bool,
) -> Result<Vec<Artifact>, OutputError> {
    let mut out = day_ahead_artifacts(inputs, &run.plan)?;
    out.extend(reforecast_artifacts(inputs, &run.plan)?);
    out.push(art("quotes.csv", quotes_csv(&run.quotes)?));
    out.extend(ladder_artifacts(inputs, &run.plan)?);
    for (k, mode) in [(1, CommitmentMode::Plant), (3, CommitmentMode::Portfolio)] {
        let sol = run.outcomes[k].solution.as_ref().expect("solved scenario");
        out.extend(rebalance_artifacts(
            inputs,
            &run.plan,
            &run.quotes,
            mode,
            sol,
            opts,
        )?);
    }
    for (k, o) in run.outcomes.iter().enumerate() {
        out.push(art(
            format!("scenario_{}_trades.csv", k + 1),
            trades_csv(&o.trades)?,
        ));
        out.push(art(
            format!("scenario_{}_fills.csv", k + 1),
            fills_csv(&o.fills)?,
        ));
    }
    let mut buf = Vec::new();
    run.comparison.write_csv(&mut buf)?;
    out.push(art("scenarios.csv", buf));
    let mut buf = Vec::new();
    run.comparison.write_hourly_csv(&mut buf)?;
    out.push(art("hourly_costs.csv", buf));
    out.push(art(
        "delta.csv",
        delta_csv(&inputs.system, &run.delta_series())?,
    ));
    out.push(art("report.txt", run.comparison.to_string().into_bytes()));
    if raw {
        out.push(art("run.json", serde_json::to_vec_pretty(run)?));
    }
    Ok(out)
}

/// Model dumps for the solves a full run performs.
pub fn mps_artifacts(
    inputs: &ScenarioInputs,
    plan: &Plan,
    quotes: &QuoteLadder,
) -> Result<Vec<Artifact>, OutputError> {
    let mut models = vec![
        ("day_ahead", day_ahead_model(&inputs.early_problem())?.lp),
        ("reforecast", day_ahead_model(&inputs.late_problem())?.lp),
    ];
    for (name, mode) in [
        ("rebalance_plant", CommitmentMode::Plant),
        ("rebalance_portfolio", CommitmentMode::Portfolio),
    ] {
        let p = rebalance_problem(inputs, &plan.commitment, quotes, mode);
        models.push((name, rebalance_model(&p)?.lp));
    }
    let mut out = Vec::new();
    for (name, lp) in models {
        let mut buf = Vec::new();
        lp.write_mps(name, &mut buf).expect("write to memory");
        out.push(art(format!("{name}.mps"), buf));
        let names = lp
            .vars
            .iter()
            .enumerate()
            .map(|(j, v)| vec![format!("C{j}"), v.name.clone()])
            .chain(
                lp.rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| vec![format!("R{i}"), r.name.clone()]),
            );
        out.push(art(
            format!("{name}.names.csv"),
            table(&["mps", "model"], names)?,
        ));
    }
    Ok(out)
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, OutputError> {
    std::fs::create_dir_all(dir).map_err(|source| OutputError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes).map_err(|source| OutputError::Write {
                path: path.clone(),
                source,
            })?;
            Ok(path)
        })
        .collect()
}
