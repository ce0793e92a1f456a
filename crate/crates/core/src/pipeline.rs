//! The evaluation chain: day-ahead commitment, late-inflow reforecast,
//! synthetic quotes, and the four balancing scenarios.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::hydro::{
    end_water_value, validate_system, validate_wind, CascadeSystem, CommitmentMode, InflowSeries,
    LoadCommitment, ScheduleSolution, TimeGrid, TradeSeries, Violation, WindSeries, PORTFOLIO_ID,
};
use crate::market::{
    synthesize_quotes, FeeSchedule, Fill, MarketError, Order, QuoteLadder, QuoteParams, Side,
    SystemImbalanceSeries,
};
use crate::milp::{
    solve_day_ahead, solve_rebalance, DayAheadProblem, RebalanceProblem, ScheduleError,
    SolveOptions,
};
use crate::settlement::{
    fill_cost, ImbalanceReport, ScenarioComparison, SettlementError, SettlementPrices,
    SCENARIO_NAMES,
};

pub const WIND_ID: &str = "wind";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid input: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("{step}: {source}")]
    Schedule {
        step: &'static str,
        source: ScheduleError,
    },
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Settlement(#[from] SettlementError),
}

/// Everything the chain needs, all on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInputs {
    pub system: CascadeSystem,
    pub grid: TimeGrid,
    pub inflow_early: InflowSeries,
    pub inflow_late: InflowSeries,
    pub wind_forecast: WindSeries,
    pub wind_actual: WindSeries,
    pub spot: Vec<f64>,
    pub quote_params: QuoteParams,
    pub fees: FeeSchedule,
}

impl ScenarioInputs {
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = validate_system(&self.system, &self.inflow_early, &self.grid);
        for x in validate_system(&self.system, &self.inflow_late, &self.grid) {
            if !v.contains(&x) {
                v.push(x);
            }
        }
        v.extend(validate_wind(&self.wind_forecast, &self.grid));
        v.extend(validate_wind(&self.wind_actual, &self.grid));
        if self.spot.len() != self.grid.steps {
            v.push(Violation {
                subject: "spot".into(),
                message: format!(
                    "{} values, grid has {} steps",
                    self.spot.len(),
                    self.grid.steps
                ),
            });
        }
        if let Some(t) = self.spot.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            v.push(Violation {
                subject: "spot".into(),
                message: format!("step {t}: price must be positive"),
            });
        }
        if let Err(e) = self.quote_params.check() {
            v.push(Violation {
                subject: "market".into(),
                message: e.to_string(),
            });
        }
        if self.fees.trade_fee < 0.0 || self.fees.imbalance_fee < 0.0 {
            v.push(Violation {
                subject: "fees".into(),
                message: "fees must be nonnegative".into(),
            });
        }
        v
    }

    fn problem(&self, inflow: &InflowSeries) -> DayAheadProblem {
        DayAheadProblem {
            system: self.system.clone(),
            inflow: inflow.clone(),
            prices: self.spot.clone(),
            grid: self.grid.clone(),
        }
    }

    pub fn early_problem(&self) -> DayAheadProblem {
        self.problem(&self.inflow_early)
    }

    pub fn late_problem(&self) -> DayAheadProblem {
        self.problem(&self.inflow_late)
    }
}

fn schedule_err(step: &'static str) -> impl FnOnce(ScheduleError) -> PipelineError {
    move |source| PipelineError::Schedule { step, source }
}

/// Day-ahead schedule and the plant-mode commitment built from it: one
/// series per hydro plant plus the wind forecast.
pub fn day_ahead_step(
    inputs: &ScenarioInputs,
    opts: &SolveOptions,
) -> Result<(ScheduleSolution, LoadCommitment), PipelineError> {
    let sol = solve_day_ahead(&inputs.early_problem(), opts).map_err(schedule_err("day-ahead"))?;
    let mut entities: Vec<String> = inputs.system.plants.iter().map(|p| p.id.clone()).collect();
    let mut series = sol.generation.clone();
    entities.push(WIND_ID.into());
    series.push(inputs.wind_forecast.values.clone());
    Ok((sol, LoadCommitment::plant(entities, series)))
}

/// Unconstrained re-solve with the late inflow forecast.
pub fn reforecast_step(
    inputs: &ScenarioInputs,
    opts: &SolveOptions,
) -> Result<ScheduleSolution, PipelineError> {
    solve_day_ahead(&inputs.late_problem(), opts).map_err(schedule_err("reforecast"))
}

/// Deviations from the commitment before any balancing, MW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawImbalance {
    /// Reforecast minus commitment, per plant.
    pub hydro: Vec<Vec<f64>>,
    /// Actual minus forecast.
    pub wind: Vec<f64>,
    pub total: Vec<f64>,
}

pub fn raw_imbalance(
    inputs: &ScenarioInputs,
    commitment: &LoadCommitment,
    reforecast: &ScheduleSolution,
) -> RawImbalance {
    let steps = inputs.grid.steps;
    let hydro: Vec<Vec<f64>> = inputs
        .system
        .plants
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let l = commitment.get(&p.id).expect("plant committed");
            (0..steps)
                .map(|t| reforecast.generation[i][t] - l[t])
                .collect()
        })
        .collect();
    let wind: Vec<f64> = (0..steps)
        .map(|t| inputs.wind_actual.values[t] - inputs.wind_forecast.values[t])
        .collect();
    let total = (0..steps)
        .map(|t| hydro.iter().map(|h| h[t]).sum::<f64>() + wind[t])
        .collect();
    RawImbalance { hydro, wind, total }
}

pub fn quotes_step(
    inputs: &ScenarioInputs,
    raw: &RawImbalance,
) -> Result<QuoteLadder, PipelineError> {
    let imb = SystemImbalanceSeries {
        values: raw.total.clone(),
    };
    Ok(synthesize_quotes(&inputs.spot, &imb, &inputs.quote_params)?)
}

pub fn rebalance_problem(
    inputs: &ScenarioInputs,
    commitment: &LoadCommitment,
    quotes: &QuoteLadder,
    mode: CommitmentMode,
) -> RebalanceProblem {
    let p = RebalanceProblem {
        base: inputs.late_problem(),
        commitment: commitment.clone(),
        quotes: quotes.clone(),
        wind_actual: Some(inputs.wind_actual.clone()),
    };
    match mode {
        CommitmentMode::Plant => p,
        CommitmentMode::Portfolio => p.as_portfolio(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub report: ImbalanceReport,
    /// Hydro generation, MW, `[plant][step]`.
    pub generation: Vec<Vec<f64>>,
    pub trades: Vec<TradeSeries>,
    pub fills: Vec<Fill>,
    /// Energy the book could not absorb, MWh per step.
    pub residual: Vec<f64>,
    /// Present for the scenarios that re-solve the schedule.
    pub solution: Option<ScheduleSolution>,
}

fn trades_from_imbalance(entity: &str, imb: &[f64]) -> TradeSeries {
    TradeSeries {
        entity: entity.into(),
        buy: imb.iter().map(|x| (-x).max(0.0)).collect(),
        sell: imb.iter().map(|x| x.max(0.0)).collect(),
    }
}

// volumes below this are solver noise, not orders
const MIN_ORDER_MWH: f64 = 1e-9;

struct Settled {
    fills: Vec<Fill>,
    residual: Vec<f64>,
    trading: Vec<f64>,
    fees: Vec<f64>,
}

/// Clears `trades` in entity order on a private copy of the book and prices
/// what is left at the settlement prices.
fn settle(inputs: &ScenarioInputs, quotes: &QuoteLadder, trades: &[TradeSeries]) -> Settled {
    let h = inputs.grid.step_hours();
    let prices = SettlementPrices::from_quotes(&inputs.spot, quotes);
    let mut book = quotes.clone();
    let steps = inputs.grid.steps;
    let mut out = Settled {
        fills: Vec::new(),
        residual: vec![0.0; steps],
        trading: vec![0.0; steps],
        fees: vec![0.0; steps],
    };
    for t in 0..steps {
        let spot = inputs.spot[t];
        for tr in trades {
            for (side, mw) in [(Side::Buy, tr.buy[t]), (Side::Sell, tr.sell[t])] {
                let volume = mw * h;
                if volume <= MIN_ORDER_MWH {
                    continue;
                }
                let res = book.clear(&Order::market(t, side, volume));
                let left = if res.unfilled > MIN_ORDER_MWH {
                    res.unfilled
                } else {
                    0.0
                };
                let settle_price = match side {
                    Side::Buy => prices.system_buy[t],
                    Side::Sell => prices.system_sell[t],
                };
                let residual_cost = match side {
                    Side::Buy => left * (settle_price - spot),
                    Side::Sell => left * (spot - settle_price),
                };
                out.trading[t] +=
                    res.fills.iter().map(|f| fill_cost(f, spot)).sum::<f64>() + residual_cost;
                out.fees[t] += crate::market::apply_fees(&res.fills, left, &inputs.fees);
                out.residual[t] += left;
                out.fills.extend(res.fills);
            }
        }
    }
    out
}

fn income(inputs: &ScenarioInputs, commitment: &LoadCommitment) -> f64 {
    let h = inputs.grid.step_hours();
    commitment
        .series
        .iter()
        .map(|s| {
            s.iter()
                .zip(&inputs.spot)
                .map(|(l, p)| l * p * h)
                .sum::<f64>()
        })
        .sum()
}

fn production(inputs: &ScenarioInputs, generation: &[Vec<f64>]) -> f64 {
    let h = inputs.grid.step_hours();
    let hydro: f64 = generation.iter().flatten().sum();
    (hydro + inputs.wind_actual.values.iter().sum::<f64>()) * h
}

/// Value given up against the reforecast schedule, per step.
fn reschedule_cost(
    inputs: &ScenarioInputs,
    reforecast: &ScheduleSolution,
    sol: Option<&ScheduleSolution>,
) -> Vec<f64> {
    let steps = inputs.grid.steps;
    let Some(sol) = sol else {
        return vec![0.0; steps];
    };
    let h = inputs.grid.step_hours();
    let mut out: Vec<f64> = (0..steps)
        .map(|t| {
            let dg: f64 = (0..inputs.system.plants.len())
                .map(|i| reforecast.generation[i][t] - sol.generation[i][t])
                .sum();
            dg * inputs.spot[t] * h
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last += end_water_value(&inputs.system, &reforecast.reservoir)
            - end_water_value(&inputs.system, &sol.reservoir);
    }
    out
}

/// Result of the first three pipeline steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub day_ahead: ScheduleSolution,
    pub commitment: LoadCommitment,
    pub reforecast: ScheduleSolution,
    pub raw: RawImbalance,
}

pub fn plan(inputs: &ScenarioInputs, opts: &SolveOptions) -> Result<Plan, PipelineError> {
    let v = inputs.validate();
    if !v.is_empty() {
        return Err(PipelineError::Invalid(v));
    }
    let (day_ahead, commitment) = day_ahead_step(inputs, opts)?;
    let reforecast = reforecast_step(inputs, opts)?;
    let raw = raw_imbalance(inputs, &commitment, &reforecast);
    Ok(Plan {
        day_ahead,
        commitment,
        reforecast,
        raw,
    })
}

/// Evaluates the four balancing strategies against one quote snapshot.
///
/// 1. every entity clears its own raw imbalance, hydro keeps the reforecast;
/// 2. hydro re-optimised against its own commitment, wind clears its error;
/// 3. raw imbalances netted per step, the remainder cleared;
/// 4. the whole portfolio re-optimised against the summed commitment.
///
/// Costs are trades settled against spot plus value lost relative to the
/// reforecast schedule plus fees.
pub fn run_scenarios(
    inputs: &ScenarioInputs,
    plan: &Plan,
    quotes: &QuoteLadder,
    opts: &SolveOptions,
    exec: Execution,
) -> Result<(Vec<ScenarioOutcome>, ScenarioComparison), PipelineError> {
    let modes = [CommitmentMode::Plant, CommitmentMode::Portfolio];
    let solved = exec::map(exec, &modes, |&mode| {
        let p = rebalance_problem(inputs, &plan.commitment, quotes, mode);
        solve_rebalance(&p, opts)
    });
    let mut solved = solved.into_iter();
    let plant_sol = solved
        .next()
        .unwrap()
        .map_err(schedule_err("plant rebalance"))?;
    let port_sol = solved
        .next()
        .unwrap()
        .map_err(schedule_err("portfolio rebalance"))?;

    let raw = &plan.raw;
    let mut individual: Vec<TradeSeries> = inputs
        .system
        .plants
        .iter()
        .zip(&raw.hydro)
        .map(|(p, imb)| trades_from_imbalance(&p.id, imb))
        .collect();
    individual.push(trades_from_imbalance(WIND_ID, &raw.wind));
    let netted = vec![trades_from_imbalance(PORTFOLIO_ID, &raw.total)];

    let cases: [(Vec<TradeSeries>, Option<ScheduleSolution>); 4] = [
        (individual, None),
        (plant_sol.trades.clone(), Some(plant_sol)),
        (netted, None),
        (port_sol.trades.clone(), Some(port_sol)),
    ];
    let inc = income(inputs, &plan.commitment);
    let mut outcomes = Vec::with_capacity(4);
    for (k, (trades, sol)) in cases.into_iter().enumerate() {
        let s = settle(inputs, quotes, &trades);
        let generation = sol.as_ref().map_or_else(
            || plan.reforecast.generation.clone(),
            |x| x.generation.clone(),
        );
        let report = ImbalanceReport::new(
            SCENARIO_NAMES[k],
            s.trading,
            reschedule_cost(inputs, &plan.reforecast, sol.as_ref()),
            s.fees,
            production(inputs, &generation),
            inc,
        )?;
        outcomes.push(ScenarioOutcome {
            report,
            generation,
            trades,
            fills: s.fills,
            residual: s.residual,
            solution: sol,
        });
    }
    let comparison = ScenarioComparison {
        reports: std::array::from_fn(|k| outcomes[k].report.clone()),
    };
    Ok((outcomes, comparison))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub plan: Plan,
    pub quotes: QuoteLadder,
    pub outcomes: Vec<ScenarioOutcome>,
    pub comparison: ScenarioComparison,
}

impl PipelineRun {
    /// Proactive minus base-case hydro generation, MW, `[plant][step]`.
    pub fn delta_series(&self) -> Vec<Vec<f64>> {
        let base = &self.outcomes[ScenarioComparison::BASE].generation;
        let common = &self.outcomes[3].generation;
        base.iter()
            .zip(common)
            .map(|(b, c)| b.iter().zip(c).map(|(x, y)| y - x).collect())
            .collect()
    }
}

pub fn run_pipeline(
    inputs: &ScenarioInputs,
    opts: &SolveOptions,
    exec: Execution,
) -> Result<PipelineRun, PipelineError> {
    let plan = plan(inputs, opts)?;
    let quotes = quotes_step(inputs, &plan.raw)?;
    let (outcomes, comparison) = run_scenarios(inputs, &plan, &quotes, opts, exec)?;
    Ok(PipelineRun {
        plan,
        quotes,
        outcomes,
        comparison,
    })
}
