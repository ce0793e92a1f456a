//! Mixed-integer scheduling models for the cascade: day-ahead profit
//! maximisation, intraday rebalancing against a quote ladder under plant or
//! portfolio load constraints, and shadow-price extraction.
//!
//! Segment logic uses one binary per plant, segment and step. A segment may
//! only carry water once the previous one is flagged, and a flagged segment
//! must run full. Problems are solved exactly by depth-first
//! branch-and-bound over these binaries on top of [`crate::lp`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hydro::{
    audit_schedule, validate_system, CascadeSystem, CommitmentMode, InflowSeries, LoadCommitment,
    ScheduleSolution, TimeGrid, TradeSeries, Violation, WindSeries, PORTFOLIO_ID,
};
use crate::lp::{LinearProgram, LpError, LpOptions, LpSolution, Sense};
use crate::market::QuoteLadder;

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error("invalid input: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("infeasible: {class} constraint cannot be met ({row})")]
    Infeasible { class: String, row: String },
    #[error("unbounded problem")]
    Unbounded,
    #[error("quotes cover {got} steps, grid has {expected}")]
    MissingQuotes { got: usize, expected: usize },
    #[error("commitment: {0}")]
    Commitment(String),
    #[error("branch-and-bound node limit of {0} reached")]
    NodeLimit(usize),
    #[error("solution is not optimal for this problem: {0}")]
    NotOptimal(String),
    #[error("lp: {0}")]
    Lp(LpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayAheadProblem {
    pub system: CascadeSystem,
    pub inflow: InflowSeries,
    /// EUR/MWh per step.
    pub prices: Vec<f64>,
    pub grid: TimeGrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RebalanceProblem {
    pub base: DayAheadProblem,
    pub commitment: LoadCommitment,
    pub quotes: QuoteLadder,
    /// Realised wind; required whenever the commitment covers the wind plant.
    pub wind_actual: Option<WindSeries>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Relative optimality gap; 0 proves optimality.
    pub mip_gap: f64,
    pub lp_tolerance: f64,
    pub max_nodes: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            mip_gap: 0.0,
            lp_tolerance: 1e-9,
            max_nodes: 100_000,
        }
    }
}

impl SolveOptions {
    fn lp(&self) -> LpOptions {
        LpOptions {
            tolerance: self.lp_tolerance,
            ..LpOptions::default()
        }
    }
}

/// Column and row positions of one built model.
#[derive(Debug, Clone, Default)]
pub struct ModelIndex {
    pub generation: Vec<Vec<usize>>,
    pub segment: Vec<Vec<Vec<usize>>>,
    pub flag: Vec<Vec<Vec<usize>>>,
    pub reservoir: Vec<Vec<usize>>,
    pub spill: Vec<Vec<usize>>,
    pub trade_entities: Vec<String>,
    pub buy: Vec<Vec<usize>>,
    pub sell: Vec<Vec<usize>>,
    /// Load-constraint rows, `[entity][step]`.
    pub load_rows: Vec<Vec<usize>>,
    pub load_entities: Vec<String>,
    pub mode: Option<CommitmentMode>,
}

/// A built model together with its index.
#[derive(Debug, Clone)]
pub struct Model {
    pub lp: LinearProgram,
    pub index: ModelIndex,
    step_seconds: f64,
    step_hours: f64,
}

fn check_base(p: &DayAheadProblem) -> Result<(), ScheduleError> {
    let mut v = validate_system(&p.system, &p.inflow, &p.grid);
    if p.prices.len() != p.grid.steps {
        v.push(Violation {
            subject: "prices".into(),
            message: format!("{} values, grid has {} steps", p.prices.len(), p.grid.steps),
        });
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(ScheduleError::Invalid(v))
    }
}

fn build_base(p: &DayAheadProblem, with_price: bool) -> Model {
    let sys = &p.system;
    let steps = p.grid.steps;
    let dt = p.grid.step_seconds;
    let h = p.grid.step_hours();
    let mut lp = LinearProgram::default();
    let mut ix = ModelIndex::default();

    for (i, plant) in sys.plants.iter().enumerate() {
        ix.generation.push(
            (0..steps)
                .map(|t| {
                    let c = if with_price { p.prices[t] * h } else { 0.0 };
                    lp.add_var(format!("g_{}_{t}", plant.id), plant.p_min, plant.p_max, c)
                })
                .collect(),
        );
        ix.segment.push(
            plant
                .segments
                .iter()
                .enumerate()
                .map(|(n, s)| {
                    (0..steps)
                        .map(|t| lp.add_var(format!("q_{}_{n}_{t}", plant.id), 0.0, s.width, 0.0))
                        .collect()
                })
                .collect(),
        );
        let _ = i;
    }
    // binaries in (plant, segment, step) order: this is the branching order
    for plant in &sys.plants {
        ix.flag.push(
            (0..plant.segments.len())
                .map(|n| {
                    (0..steps)
                        .map(|t| lp.add_binary(format!("mu_{}_{n}_{t}", plant.id)))
                        .collect()
                })
                .collect(),
        );
    }
    for r in &sys.reservoirs {
        ix.reservoir.push(
            (0..steps)
                .map(|t| {
                    let c = if t + 1 == steps {
                        r.value_per_m3() * dt
                    } else {
                        0.0
                    };
                    lp.add_var(format!("R_{}_{t}", r.id), r.r_min / dt, r.r_max / dt, c)
                })
                .collect(),
        );
        ix.spill.push(
            (0..steps)
                .map(|t| lp.add_var(format!("fl_{}_{t}", r.id), 0.0, f64::INFINITY, 0.0))
                .collect(),
        );
    }

    for (i, plant) in sys.plants.iter().enumerate() {
        for t in 0..steps {
            let mut coeffs = vec![(ix.generation[i][t], 1.0)];
            for (n, s) in plant.segments.iter().enumerate() {
                coeffs.push((ix.segment[i][n][t], -s.slope));
            }
            lp.add_row(
                format!("link_{}_{t}", plant.id),
                "pq_link",
                coeffs,
                Sense::Eq,
                0.0,
            );
            for (n, s) in plant.segments.iter().enumerate() {
                if n > 0 {
                    lp.add_row(
                        format!("seg_open_{}_{n}_{t}", plant.id),
                        "segment_order",
                        vec![(ix.segment[i][n][t], 1.0), (ix.flag[i][n - 1][t], -s.width)],
                        Sense::Le,
                        0.0,
                    );
                }
                lp.add_row(
                    format!("seg_full_{}_{n}_{t}", plant.id),
                    "segment_order",
                    vec![(ix.segment[i][n][t], 1.0), (ix.flag[i][n][t], -s.width)],
                    Sense::Ge,
                    0.0,
                );
            }
        }
    }

    // R_t - R_{t-1} + own discharge - upstream discharge + spill = inflow
    for (m, r) in sys.reservoirs.iter().enumerate() {
        for t in 0..steps {
            let mut coeffs = vec![(ix.reservoir[m][t], 1.0), (ix.spill[m][t], 1.0)];
            let mut rhs = p.inflow.values[m][t];
            if t == 0 {
                rhs += r.r_init / dt;
            } else {
                coeffs.push((ix.reservoir[m][t - 1], -1.0));
            }
            if m < sys.plants.len() {
                for &q in ix.segment[m].iter().map(|s| &s[t]) {
                    coeffs.push((q, 1.0));
                }
            }
            if m > 0 {
                for &q in ix.segment[m - 1].iter().map(|s| &s[t]) {
                    coeffs.push((q, -1.0));
                }
            }
            lp.add_row(
                format!("balance_{}_{t}", r.id),
                "reservoir_balance",
                coeffs,
                Sense::Eq,
                rhs,
            );
        }
    }

    Model {
        lp,
        index: ix,
        step_seconds: dt,
        step_hours: h,
    }
}

/// Builds the day-ahead model: maximise spot revenue plus end-of-horizon water value.
pub fn day_ahead_model(p: &DayAheadProblem) -> Result<Model, ScheduleError> {
    check_base(p)?;
    Ok(build_base(p, true))
}

fn check_rebalance(p: &RebalanceProblem) -> Result<(), ScheduleError> {
    check_base(&p.base)?;
    let steps = p.base.grid.steps;
    if p.quotes.len() != steps {
        return Err(ScheduleError::MissingQuotes {
            got: p.quotes.len(),
            expected: steps,
        });
    }
    let c = &p.commitment;
    if c.series.len() != c.entities.len() || c.series.iter().any(|s| s.len() != steps) {
        return Err(ScheduleError::Commitment(format!(
            "every series needs {steps} values"
        )));
    }
    match c.mode {
        CommitmentMode::Plant => {
            for plant in &p.base.system.plants {
                if c.get(&plant.id).is_none() {
                    return Err(ScheduleError::Commitment(format!(
                        "no series for plant {}",
                        plant.id
                    )));
                }
            }
            let others: Vec<&String> = c
                .entities
                .iter()
                .filter(|e| p.base.system.plant_index(e).is_none())
                .collect();
            if others.len() > 1 {
                return Err(ScheduleError::Commitment(format!(
                    "more than one non-hydro entity: {others:?}"
                )));
            }
            if !others.is_empty() && p.wind_actual.is_none() {
                return Err(ScheduleError::Commitment(format!(
                    "wind entity {} committed but no actual wind given",
                    others[0]
                )));
            }
        }
        CommitmentMode::Portfolio => {
            if c.entities.len() != 1 {
                return Err(ScheduleError::Commitment(
                    "portfolio mode takes exactly one series".into(),
                ));
            }
        }
    }
    if let Some(w) = &p.wind_actual {
        if w.values.len() != steps {
            return Err(ScheduleError::Commitment(format!(
                "wind actual has {} values, grid has {steps}",
                w.values.len()
            )));
        }
    }
    Ok(())
}

/// Builds the intraday model: commitment revenue, minus pay-as-bid purchases,
/// plus pay-as-bid sales, plus end-of-horizon water value.
pub fn rebalance_model(p: &RebalanceProblem) -> Result<Model, ScheduleError> {
    check_rebalance(p)?;
    let base = &p.base;
    let steps = base.grid.steps;
    let mut model = build_base(base, false);
    let h = model.step_hours;
    let lp = &mut model.lp;
    let ix = &mut model.index;
    let c = &p.commitment;
    ix.mode = Some(c.mode);

    lp.offset = c
        .series
        .iter()
        .map(|s| {
            s.iter()
                .zip(&base.prices)
                .map(|(l, pr)| l * pr * h)
                .sum::<f64>()
        })
        .sum();

    let wind = |t: usize| p.wind_actual.as_ref().map_or(0.0, |w| w.values[t]);

    ix.trade_entities = c.entities.clone();
    for e in &c.entities {
        let mut buys = Vec::with_capacity(steps);
        let mut sells = Vec::with_capacity(steps);
        for t in 0..steps {
            let ub_buy = if p.quotes.steps[t].asks.is_empty() {
                0.0
            } else {
                f64::INFINITY
            };
            let ub_sell = if p.quotes.steps[t].bids.is_empty() {
                0.0
            } else {
                f64::INFINITY
            };
            buys.push(lp.add_var(format!("buy_{e}_{t}"), 0.0, ub_buy, 0.0));
            sells.push(lp.add_var(format!("sell_{e}_{t}"), 0.0, ub_sell, 0.0));
        }
        ix.buy.push(buys);
        ix.sell.push(sells);
    }

    for t in 0..steps {
        let q = &p.quotes.steps[t];
        if !q.asks.is_empty() {
            let mut coeffs: Vec<(usize, f64)> = ix.buy.iter().map(|b| (b[t], 1.0)).collect();
            for tier in &q.asks {
                let v = lp.add_var(
                    format!("ask_{t}_{}", tier.tier),
                    0.0,
                    tier.volume / h,
                    -tier.price * h,
                );
                coeffs.push((v, -1.0));
            }
            lp.add_row(format!("asks_{t}"), "tier_capacity", coeffs, Sense::Eq, 0.0);
        }
        if !q.bids.is_empty() {
            let mut coeffs: Vec<(usize, f64)> = ix.sell.iter().map(|s| (s[t], 1.0)).collect();
            for tier in &q.bids {
                let v = lp.add_var(
                    format!("bid_{t}_{}", tier.tier),
                    0.0,
                    tier.volume / h,
                    tier.price * h,
                );
                coeffs.push((v, -1.0));
            }
            lp.add_row(format!("bids_{t}"), "tier_capacity", coeffs, Sense::Eq, 0.0);
        }
    }

    for (k, e) in c.entities.iter().enumerate() {
        let rows = (0..steps)
            .map(|t| {
                let mut coeffs = vec![(ix.buy[k][t], 1.0), (ix.sell[k][t], -1.0)];
                let mut rhs = c.series[k][t];
                match c.mode {
                    CommitmentMode::Plant => match base.system.plant_index(e) {
                        Some(i) => coeffs.push((ix.generation[i][t], 1.0)),
                        None => rhs -= wind(t),
                    },
                    CommitmentMode::Portfolio => {
                        for g in &ix.generation {
                            coeffs.push((g[t], 1.0));
                        }
                        rhs -= wind(t);
                    }
                }
                lp.add_row(
                    format!("load_{e}_{t}"),
                    "load_commitment",
                    coeffs,
                    Sense::Eq,
                    rhs,
                )
            })
            .collect();
        ix.load_rows.push(rows);
    }
    ix.load_entities = c.entities.clone();
    Ok(model)
}

fn class_name(group: &str) -> &'static str {
    match group {
        "reservoir_balance" => "reservoir balance/bounds",
        "load_commitment" => "load commitment",
        "tier_capacity" => "quote tier capacity",
        "segment_order" => "segment ordering",
        "pq_link" => "generation limits",
        _ => "model",
    }
}

fn map_lp(lp: &LinearProgram, e: LpError) -> ScheduleError {
    match e {
        LpError::Infeasible { row, group } => ScheduleError::Infeasible {
            class: class_name(group).into(),
            row: lp.rows[row].name.clone(),
        },
        LpError::InvertedBounds(v) => ScheduleError::Infeasible {
            class: "variable bounds".into(),
            row: v,
        },
        LpError::Unbounded => ScheduleError::Unbounded,
        other => ScheduleError::Lp(other),
    }
}

/// Result of a branch-and-bound run.
#[derive(Debug, Clone)]
pub struct MipResult {
    pub lp: LpSolution,
    pub nodes: usize,
}

const INT_TOL: f64 = 1e-6;

/// Depth-first branch-and-bound over the integer columns of `lp`.
///
/// Branches on the lowest-index fractional column, exploring the `= 1` child
/// first. `rounding` may propose a full set of integer fixings from a
/// relaxation; it is tried once at the root to seed the incumbent.
pub fn branch_and_bound(
    lp: &LinearProgram,
    opts: &SolveOptions,
    rounding: Option<&dyn Fn(&[f64]) -> Vec<(usize, f64)>>,
) -> Result<MipResult, ScheduleError> {
    let lp_opts = opts.lp();
    let ints: Vec<usize> = (0..lp.vars.len()).filter(|&j| lp.vars[j].integer).collect();
    let root_bounds = lp.bounds();
    let root = lp
        .solve_with_bounds(&root_bounds, &lp_opts)
        .map_err(|e| map_lp(lp, e))?;

    let mut incumbent: Option<LpSolution> = None;
    let fractional = |x: &[f64]| {
        ints.iter()
            .copied()
            .find(|&j| (x[j] - x[j].round()).abs() > INT_TOL)
    };

    if let Some(round) = rounding {
        if fractional(&root.values).is_some() {
            let mut b = root_bounds.clone();
            for (j, v) in round(&root.values) {
                b[j] = (v, v);
            }
            if let Ok(s) = lp.solve_with_bounds(&b, &lp_opts) {
                if fractional(&s.values).is_none() {
                    incumbent = Some(s);
                }
            }
        }
    }

    let prune = |bound: f64, inc: &Option<LpSolution>| -> bool {
        match inc {
            None => false,
            Some(s) => {
                let slack =
                    (opts.mip_gap * s.objective.abs()).max(1e-9 * s.objective.abs().max(1.0));
                bound <= s.objective + slack
            }
        }
    };

    let mut nodes = 1usize;
    let mut stack: Vec<(Vec<(f64, f64)>, LpSolution)> = vec![(root_bounds, root)];
    while let Some((bounds, sol)) = stack.pop() {
        if prune(sol.objective, &incumbent) {
            continue;
        }
        match fractional(&sol.values) {
            None => {
                if incumbent
                    .as_ref()
                    .is_none_or(|s| sol.objective > s.objective)
                {
                    incumbent = Some(sol);
                }
            }
            Some(j) => {
                // children pushed zero-first so the one-branch is explored first
                let mut children = Vec::with_capacity(2);
                for v in [0.0, 1.0] {
                    if nodes >= opts.max_nodes {
                        return Err(ScheduleError::NodeLimit(opts.max_nodes));
                    }
                    let mut b = bounds.clone();
                    b[j] = (v, v);
                    nodes += 1;
                    match lp.solve_with_bounds(&b, &lp_opts) {
                        Ok(s) => children.push((b, s)),
                        Err(LpError::Infeasible { .. }) | Err(LpError::InvertedBounds(_)) => {}
                        Err(e) => return Err(map_lp(lp, e)),
                    }
                }
                for c in children {
                    if !prune(c.1.objective, &incumbent) {
                        stack.push(c);
                    }
                }
            }
        }
    }
    match incumbent {
        Some(lp) => Ok(MipResult { lp, nodes }),
        None => Err(ScheduleError::Infeasible {
            class: "segment ordering".into(),
            row: "no integer-feasible schedule".into(),
        }),
    }
}

impl Model {
    /// Segment flags that fill each plant's segments in order up to the
    /// relaxation's generation level.
    fn ordered_flags(&self, system: &CascadeSystem, x: &[f64]) -> Vec<(usize, f64)> {
        let ix = &self.index;
        let mut out = Vec::new();
        for (i, plant) in system.plants.iter().enumerate() {
            for t in 0..ix.generation[i].len() {
                let g = x[ix.generation[i][t]];
                let fill = plant.fill_segments(g);
                for (n, s) in plant.segments.iter().enumerate() {
                    let full = fill[n] >= s.width - 1e-9;
                    out.push((ix.flag[i][n][t], if full { 1.0 } else { 0.0 }));
                }
            }
        }
        out
    }

    pub fn solve(
        &self,
        system: &CascadeSystem,
        opts: &SolveOptions,
    ) -> Result<(ScheduleSolution, MipResult), ScheduleError> {
        let round = |x: &[f64]| self.ordered_flags(system, x);
        let res = branch_and_bound(&self.lp, opts, Some(&round))?;
        Ok((self.to_schedule(&res.lp.values, res.lp.objective), res))
    }

    pub fn to_schedule(&self, x: &[f64], objective: f64) -> ScheduleSolution {
        let ix = &self.index;
        let get = |v: &Vec<Vec<usize>>| -> Vec<Vec<f64>> {
            v.iter()
                .map(|r| r.iter().map(|&j| x[j]).collect())
                .collect()
        };
        let dt = self.step_seconds;
        ScheduleSolution {
            generation: get(&ix.generation),
            segment_discharge: ix.segment.iter().map(get).collect(),
            segment_flags: ix
                .flag
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|s| s.iter().map(|&j| x[j] > 0.5).collect())
                        .collect()
                })
                .collect(),
            reservoir: ix
                .reservoir
                .iter()
                .map(|r| r.iter().map(|&j| x[j] * dt).collect())
                .collect(),
            spill: get(&ix.spill),
            trades: ix
                .trade_entities
                .iter()
                .enumerate()
                .map(|(k, e)| TradeSeries {
                    entity: e.clone(),
                    buy: ix.buy[k].iter().map(|&j| x[j]).collect(),
                    sell: ix.sell[k].iter().map(|&j| x[j]).collect(),
                })
                .collect(),
            objective,
        }
    }

    /// Bounds with every binary pinned to the flags of `sol`.
    pub fn fixed_flag_bounds(&self, sol: &ScheduleSolution) -> Vec<(f64, f64)> {
        let mut b = self.lp.bounds();
        for (i, plant) in self.index.flag.iter().enumerate() {
            for (n, seg) in plant.iter().enumerate() {
                for (t, &j) in seg.iter().enumerate() {
                    let v = if sol.segment_flags[i][n][t] { 1.0 } else { 0.0 };
                    b[j] = (v, v);
                }
            }
        }
        b
    }
}

/// Maximises spot revenue plus end-of-horizon water value for the cascade.
pub fn solve_day_ahead(
    p: &DayAheadProblem,
    opts: &SolveOptions,
) -> Result<ScheduleSolution, ScheduleError> {
    let model = day_ahead_model(p)?;
    model.solve(&p.system, opts).map(|(s, _)| s)
}

/// Re-optimises against intraday quotes while honouring the commitment, per
/// plant or for the portfolio as a whole.
pub fn solve_rebalance(
    p: &RebalanceProblem,
    opts: &SolveOptions,
) -> Result<ScheduleSolution, ScheduleError> {
    let model = rebalance_model(p)?;
    model.solve(&p.base.system, opts).map(|(s, _)| s)
}

/// Shadow prices of a rebalance solution, obtained by pinning its binaries
/// and re-solving the remaining LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    pub mode: CommitmentMode,
    pub entities: Vec<String>,
    /// Marginal cost of one more MWh of commitment, EUR/MWh, `[entity][step]`.
    /// Equals minus the derivative of the operating value (objective without
    /// the constant commitment revenue) with respect to the load.
    pub load: Vec<Vec<f64>>,
    /// Derivative of the objective with respect to each end-of-step volume,
    /// EUR per m3; nonzero only where a reservoir bound is active.
    pub reservoir: Vec<Vec<f64>>,
}

pub fn extract_duals(
    p: &RebalanceProblem,
    sol: &ScheduleSolution,
    opts: &SolveOptions,
) -> Result<Duals, ScheduleError> {
    let model = rebalance_model(p)?;
    let dims_ok = sol.segment_flags.len() == p.base.system.plants.len()
        && sol
            .segment_flags
            .iter()
            .zip(&p.base.system.plants)
            .all(|(f, pl)| {
                f.len() == pl.segments.len() && f.iter().all(|s| s.len() == p.base.grid.steps)
            });
    if !dims_ok {
        return Err(ScheduleError::NotOptimal(
            "solution shape does not match problem".into(),
        ));
    }
    let issues = audit_schedule(&p.base.system, &p.base.inflow, &p.base.grid, sol, 1e-6);
    if let Some(v) = issues.first() {
        return Err(ScheduleError::NotOptimal(format!(
            "infeasible schedule: {v}"
        )));
    }
    let bounds = model.fixed_flag_bounds(sol);
    let lp = model
        .lp
        .solve_with_bounds(&bounds, &opts.lp())
        .map_err(|e| map_lp(&model.lp, e))?;
    let scale = 1e-6 * (1.0 + lp.objective.abs());
    if (lp.objective - sol.objective).abs() > scale {
        return Err(ScheduleError::NotOptimal(format!(
            "objective {} differs from re-solved {}",
            sol.objective, lp.objective
        )));
    }
    let h = model.step_hours;
    let dt = model.step_seconds;
    let ix = &model.index;
    Ok(Duals {
        mode: p.commitment.mode,
        entities: ix.load_entities.clone(),
        load: ix
            .load_rows
            .iter()
            .map(|rows| rows.iter().map(|&r| -lp.row_duals[r] / h).collect())
            .collect(),
        reservoir: ix
            .reservoir
            .iter()
            .map(|r| r.iter().map(|&j| lp.reduced_costs[j] / dt).collect())
            .collect(),
    })
}

impl RebalanceProblem {
    /// Same data with the commitment collapsed to a single portfolio series.
    pub fn as_portfolio(&self) -> Self {
        Self {
            commitment: self.commitment.to_portfolio(),
            ..self.clone()
        }
    }

    pub fn entity_ids(&self) -> Vec<String> {
        match self.commitment.mode {
            CommitmentMode::Plant => self.commitment.entities.clone(),
            CommitmentMode::Portfolio => vec![PORTFOLIO_ID.to_string()],
        }
    }
}
