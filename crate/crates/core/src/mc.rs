//! Marginal cost of hydro production: static per-segment costs from water
//! values, intraday bid ladders around an operating point, and dynamic costs
//! read from the load-constraint duals of a rebalance solve.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hydro::{
    CascadeSystem, CommitmentMode, EfficiencySegment, HydroPlant, InflowSeries, LoadCommitment,
    Reservoir, ScheduleSolution, TimeGrid,
};
use crate::io::fmt_num;
use crate::market::QuoteLadder;
use crate::milp::{extract_duals, DayAheadProblem, RebalanceProblem, ScheduleError, SolveOptions};

#[derive(Debug, Error)]
pub enum McError {
    #[error("plant {plant}: segment {segment} has zero slope")]
    ZeroSlope { plant: String, segment: usize },
    #[error("plant {plant}: step {step} commitment {g} MW outside [{p_min}, {p_max}]")]
    OutOfRange {
        plant: String,
        step: usize,
        g: f64,
        p_min: f64,
        p_max: f64,
    },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("write: {0}")]
    Io(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSegment {
    pub plant: String,
    pub segment: usize,
    /// EUR/MWh.
    pub mc: f64,
    /// MWh the segment can deliver in one step.
    pub volume: f64,
}

/// `mc_n = WV * reference_slope / slope_n` for every segment of `plant`.
pub fn segment_mc(
    plant: &HydroPlant,
    reservoir: &Reservoir,
    step_hours: f64,
) -> Result<Vec<McSegment>, McError> {
    plant
        .segments
        .iter()
        .enumerate()
        .map(|(n, s)| {
            if s.slope == 0.0 {
                return Err(McError::ZeroSlope {
                    plant: plant.id.clone(),
                    segment: n,
                });
            }
            Ok(McSegment {
                plant: plant.id.clone(),
                segment: n,
                mc: reservoir.water_value * reservoir.reference_slope / s.slope,
                volume: s.power() * step_hours,
            })
        })
        .collect()
}

/// Segment costs of plant `i` in a cascade. Released water is not lost but
/// moves to the next reservoir, so only the difference in stored value is
/// given up: `(WV_i * ref_i - WV_{i+1} * ref_{i+1}) / slope_n`.
pub fn cascade_segment_mc(
    system: &CascadeSystem,
    i: usize,
    step_hours: f64,
) -> Result<Vec<McSegment>, McError> {
    let plant = &system.plants[i];
    let own = &system.reservoirs[i];
    let below = system
        .reservoirs
        .get(i + 1)
        .map_or(0.0, |r| r.water_value * r.reference_slope);
    let net = Reservoir {
        water_value: 1.0,
        reference_slope: (own.water_value * own.reference_slope - below).max(0.0),
        ..own.clone()
    };
    segment_mc(plant, &net, step_hours)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderSide {
    SellMore,
    BuyBack,
}

impl LadderSide {
    pub fn as_str(self) -> &'static str {
        match self {
            LadderSide::SellMore => "SELL_MORE",
            LadderSide::BuyBack => "BUY_BACK",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderEntry {
    pub side: LadderSide,
    pub price: f64,
    /// MWh.
    pub volume: f64,
}

/// Per-step offers around a committed operating point, nearest segment first
/// on each side.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BidLadder {
    pub steps: Vec<Vec<LadderEntry>>,
}

impl BidLadder {
    pub fn side(&self, step: usize, side: LadderSide) -> impl Iterator<Item = &LadderEntry> {
        self.steps[step].iter().filter(move |e| e.side == side)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), McError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "side", "price_eur_mwh", "volume_mwh"])?;
        for (t, entries) in self.steps.iter().enumerate() {
            for e in entries {
                out.write_record([
                    t.to_string(),
                    e.side.as_str().to_string(),
                    fmt_num(e.price),
                    fmt_num(e.volume),
                ])?;
            }
        }
        out.flush().map_err(|e| McError::Io(e.into()))
    }
}

// ladder volumes are reported at micro-MWh resolution so that round-off in
// width * slope does not leak into the published numbers
fn micro(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub fn build_ladder(
    plant: &HydroPlant,
    reservoir: &Reservoir,
    committed: &[f64],
    step_hours: f64,
) -> Result<BidLadder, McError> {
    let mcs = segment_mc(plant, reservoir, step_hours)?;
    ladder_from_costs(plant, &mcs, committed, step_hours)
}

/// Ladder from explicit per-segment costs, e.g. [`cascade_segment_mc`].
pub fn ladder_from_costs(
    plant: &HydroPlant,
    mcs: &[McSegment],
    committed: &[f64],
    step_hours: f64,
) -> Result<BidLadder, McError> {
    let tol = 1e-9;
    let mut steps = Vec::with_capacity(committed.len());
    for (t, &g) in committed.iter().enumerate() {
        if g < plant.p_min - tol || g > plant.p_max + tol {
            return Err(McError::OutOfRange {
                plant: plant.id.clone(),
                step: t,
                g,
                p_min: plant.p_min,
                p_max: plant.p_max,
            });
        }
        let mut entries = Vec::new();
        // power range [lo, hi) of every segment on the cumulative curve
        let mut lo = 0.0;
        let ranges: Vec<(f64, f64)> = plant
            .segments
            .iter()
            .map(|s| {
                let r = (lo, lo + s.power());
                lo = r.1;
                r
            })
            .collect();
        for (n, &(a, b)) in ranges.iter().enumerate() {
            let v = micro((b.min(plant.p_max) - a.max(g)) * step_hours);
            if v > 0.0 {
                entries.push(LadderEntry {
                    side: LadderSide::SellMore,
                    price: mcs[n].mc,
                    volume: v,
                });
            }
        }
        for (n, &(a, b)) in ranges.iter().enumerate().rev() {
            let v = micro((b.min(g) - a.max(plant.p_min)) * step_hours);
            if v > 0.0 {
                entries.push(LadderEntry {
                    side: LadderSide::BuyBack,
                    price: mcs[n].mc,
                    volume: v,
                });
            }
        }
        steps.push(entries);
    }
    Ok(BidLadder { steps })
}

/// Dynamic marginal cost series, EUR/MWh per entity and step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSeries {
    pub mode: CommitmentMode,
    pub entities: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl McSeries {
    pub fn get(&self, entity: &str) -> Option<&[f64]> {
        self.entities
            .iter()
            .position(|e| e == entity)
            .map(|k| self.values[k].as_slice())
    }
}

/// Load-constraint shadow prices of an optimal rebalance solution.
pub fn dynamic_mc(
    p: &RebalanceProblem,
    sol: &ScheduleSolution,
    opts: &SolveOptions,
) -> Result<McSeries, McError> {
    let d = extract_duals(p, sol, opts)?;
    Ok(McSeries {
        mode: d.mode,
        entities: d.entities,
        values: d.load,
    })
}

/// Constructed reference cases.
pub mod fixtures {
    use super::*;

    pub const LADDER_WATER_VALUE: f64 = 20.0;
    pub const LADDER_OPERATING_POINT: f64 = 124.0;

    /// 68-140 MW plant with segment costs 17.1, 18.3, 21.5 and 24.2 EUR/MWh at
    /// a water value of 20, plus a base block of 68 MW below the working
    /// range. The reference slope makes full load 140 MW at 42 m3/s.
    pub fn ladder_plant(id: &str, reservoir: &str, downstream: Option<&str>) -> (HydroPlant, f64) {
        let blocks = [
            (68.0, 16.0),
            (19.0, 17.1),
            (20.0, 18.3),
            (17.0, 21.5),
            (16.0, 24.2),
        ];
        let wv = LADDER_WATER_VALUE;
        let energy_cost: f64 = blocks.iter().map(|(p, mc)| p * mc).sum();
        let reference = energy_cost / wv / 42.0;
        let segments = blocks
            .iter()
            .map(|&(p, mc)| {
                let slope = reference * wv / mc;
                EfficiencySegment {
                    width: p / slope,
                    slope,
                }
            })
            .collect();
        (
            HydroPlant {
                id: id.into(),
                p_min: 68.0,
                p_max: 140.0,
                segments,
                upstream_reservoir: reservoir.into(),
                downstream_reservoir: downstream.map(Into::into),
            },
            reference,
        )
    }

    pub fn ladder_reservoir(reference: f64) -> Reservoir {
        Reservoir {
            id: "r".into(),
            r_min: 0.0,
            r_max: 1e8,
            r_init: 5e7,
            water_value: LADDER_WATER_VALUE,
            reference_slope: reference,
        }
    }

    pub const FLOOD_HOUR: usize = 0;

    /// Two identical plants in series, committed mid-segment. In the first
    /// hour a surplus inflow reaches the full downstream reservoir, which
    /// spills when both plants run at their own commitments. The upstream
    /// reservoir's reference slope is the sum along the cascade, so water
    /// held upstream is worth both plants' production.
    pub fn flood_problem() -> RebalanceProblem {
        let (up, reference) = ladder_plant("upper", "upper_res", Some("lower_res"));
        let (down, _) = ladder_plant("lower", "lower_res", None);
        let steps = 3;
        let room = 5.0 * 3600.0;
        let reservoirs = vec![
            Reservoir {
                id: "upper_res".into(),
                r_min: 0.0,
                r_max: 2e6,
                r_init: 1e6,
                water_value: LADDER_WATER_VALUE,
                reference_slope: 2.0 * reference,
            },
            Reservoir {
                id: "lower_res".into(),
                r_min: 0.0,
                r_max: 1e6,
                r_init: 1e6 - room,
                water_value: LADDER_WATER_VALUE,
                reference_slope: reference,
            },
        ];
        let mut inflow = InflowSeries::constant(2, steps, 0.0);
        inflow.values[0] = vec![10.0; steps];
        inflow.values[1][FLOOD_HOUR] = 15.0;
        let load = vec![115.0, 100.0, 100.0];
        RebalanceProblem {
            base: DayAheadProblem {
                system: CascadeSystem {
                    reservoirs,
                    plants: vec![up, down],
                },
                inflow,
                prices: vec![30.0; steps],
                grid: TimeGrid::hourly_from_epoch(steps),
            },
            commitment: LoadCommitment::plant(
                vec!["upper".into(), "lower".into()],
                vec![load.clone(), load],
            ),
            quotes: QuoteLadder::empty(steps),
            wind_actual: None,
        }
    }
}
