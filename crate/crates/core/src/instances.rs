//! Seeded random instance generation for sweeps, benchmarks and the CLI's
//! `--seed` mode.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hydro::{
    CascadeSystem, EfficiencySegment, HydroPlant, InflowSeries, Reservoir, TimeGrid, WindRole,
    WindSeries,
};
use crate::market::{FeeSchedule, QuoteParams};
use crate::milp::DayAheadProblem;
use crate::pipeline::ScenarioInputs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceShape {
    pub plants: usize,
    pub steps: usize,
    pub segments: usize,
}

impl InstanceShape {
    pub fn binaries(&self) -> usize {
        self.plants * self.steps * self.segments
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_plant<R: Rng>(
    rng: &mut R,
    id: String,
    up: String,
    down: Option<String>,
    segments: usize,
) -> HydroPlant {
    let mut slope = rng.gen_range(2.5..4.0);
    let segs: Vec<EfficiencySegment> = (0..segments)
        .map(|_| {
            let s = EfficiencySegment {
                width: rng.gen_range(3.0..12.0),
                slope,
            };
            slope *= rng.gen_range(0.7..0.95);
            s
        })
        .collect();
    let max: f64 = segs.iter().map(EfficiencySegment::power).sum();
    let p_min = (rng.gen_range(0.0..0.35) * max * 1e3).round() / 1e3;
    HydroPlant {
        id,
        p_min,
        p_max: max,
        segments: segs,
        upstream_reservoir: up,
        downstream_reservoir: down,
    }
}

/// A feasible random serial cascade with hourly steps.
pub fn random_system<R: Rng>(rng: &mut R, shape: InstanceShape) -> (CascadeSystem, InflowSeries) {
    let dt = 3600.0;
    let ids: Vec<String> = (0..shape.plants).map(|i| format!("res{i}")).collect();
    let plants: Vec<HydroPlant> = (0..shape.plants)
        .map(|i| {
            random_plant(
                rng,
                format!("plant{i}"),
                ids[i].clone(),
                ids.get(i + 1).cloned(),
                shape.segments,
            )
        })
        .collect();
    let mut reservoirs = Vec::new();
    let mut inflow = Vec::new();
    for (i, p) in plants.iter().enumerate() {
        let q_min = p.power_to_discharge(p.p_min).unwrap_or(0.0);
        let q_max = p.max_discharge();
        let need = q_min * dt * shape.steps as f64;
        let r_min = rng.gen_range(0.0..0.5) * q_max * dt;
        let cushion = rng.gen_range(0.2..2.0) * q_max * dt * shape.steps as f64;
        let r_init = r_min + need + rng.gen_range(0.0..1.0) * cushion;
        let r_max = r_init + rng.gen_range(0.1..1.5) * q_max * dt * shape.steps as f64;
        let reference_slope = p.best_slope();
        reservoirs.push(Reservoir {
            id: ids[i].clone(),
            r_min,
            r_max,
            r_init,
            water_value: rng.gen_range(10.0..40.0),
            reference_slope,
        });
        inflow.push(
            (0..shape.steps)
                .map(|_| rng.gen_range(0.0..0.8) * q_max)
                .collect(),
        );
    }
    (
        CascadeSystem { reservoirs, plants },
        InflowSeries { values: inflow },
    )
}

pub fn random_prices<R: Rng>(rng: &mut R, steps: usize) -> Vec<f64> {
    (0..steps).map(|_| rng.gen_range(5.0..60.0)).collect()
}

pub fn random_day_ahead<R: Rng>(rng: &mut R, shape: InstanceShape) -> DayAheadProblem {
    let (system, inflow) = random_system(rng, shape);
    DayAheadProblem {
        prices: random_prices(rng, shape.steps),
        grid: TimeGrid::hourly_from_epoch(shape.steps),
        system,
        inflow,
    }
}

/// Random portfolio with inflow revisions, wind forecast errors and a quote
/// ladder deep enough to absorb every imbalance the pipeline can produce.
pub fn random_scenario_inputs<R: Rng>(rng: &mut R, shape: InstanceShape) -> ScenarioInputs {
    let (system, inflow_early) = random_system(rng, shape);
    let inflow_late = InflowSeries {
        values: inflow_early
            .values
            .iter()
            .map(|s| s.iter().map(|v| v * rng.gen_range(0.5..1.5)).collect())
            .collect(),
    };
    let cap = rng.gen_range(10.0..60.0);
    let wind_forecast: Vec<f64> = (0..shape.steps).map(|_| rng.gen_range(0.0..cap)).collect();
    let wind_actual: Vec<f64> = wind_forecast
        .iter()
        .map(|w| (w + rng.gen_range(-0.4..0.4) * cap).clamp(0.0, cap))
        .collect();
    let hydro_cap: f64 = system.plants.iter().map(|p| p.p_max).sum();
    ScenarioInputs {
        grid: TimeGrid::hourly_from_epoch(shape.steps),
        system,
        inflow_early,
        inflow_late,
        wind_forecast: WindSeries {
            role: WindRole::Forecast,
            values: wind_forecast,
        },
        wind_actual: WindSeries {
            role: WindRole::Actual,
            values: wind_actual,
        },
        spot: random_prices(rng, shape.steps),
        quote_params: QuoteParams {
            spread_frac: rng.gen_range(0.05..0.25),
            sensitivity: rng.gen_range(0.0..0.01),
            depth: 3,
            tier_volume: 2.0 * (hydro_cap + cap),
        },
        fees: FeeSchedule::zero(),
    }
}
