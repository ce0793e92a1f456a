//! Cascade hydro domain types, invariant checks and PQ-curve conversions.

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SECONDS_PER_HOUR: f64 = 3600.0;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("discharge {q} m3/s outside [0, {max}] for plant {plant}")]
    DischargeOutOfRange { plant: String, q: f64, max: f64 },
    #[error("power {p} MW outside [0, {max}] for plant {plant}")]
    PowerOutOfRange { plant: String, p: f64, max: f64 },
    #[error("series {name} has {got} values, expected {expected}")]
    Length {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("unknown entity {0}")]
    UnknownEntity(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: NaiveDateTime,
    pub steps: usize,
    /// Settlement period length in seconds.
    #[serde(default = "default_step_seconds")]
    pub step_seconds: f64,
}

fn default_step_seconds() -> f64 {
    SECONDS_PER_HOUR
}

impl TimeGrid {
    pub fn hourly(start: NaiveDateTime, steps: usize) -> Self {
        Self {
            start,
            steps,
            step_seconds: SECONDS_PER_HOUR,
        }
    }

    /// A grid starting at midnight 2020-10-07, handy for tests and fixtures.
    pub fn hourly_from_epoch(steps: usize) -> Self {
        let start = chrono::NaiveDate::from_ymd_opt(2020, 10, 7)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .expect("valid date");
        Self::hourly(start, steps)
    }

    pub fn step_hours(&self) -> f64 {
        self.step_seconds / SECONDS_PER_HOUR
    }
}

/// One linear piece of a PQ-curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencySegment {
    /// Discharge capacity of the segment, m3/s.
    pub width: f64,
    /// Incremental MW per m3/s.
    pub slope: f64,
}

impl EfficiencySegment {
    pub fn power(&self) -> f64 {
        self.width * self.slope
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydroPlant {
    pub id: String,
    pub p_min: f64,
    pub p_max: f64,
    pub segments: Vec<EfficiencySegment>,
    pub upstream_reservoir: String,
    /// `None` means the plant discharges to the sea.
    pub downstream_reservoir: Option<String>,
}

impl HydroPlant {
    pub fn max_discharge(&self) -> f64 {
        self.segments.iter().map(|s| s.width).sum()
    }

    pub fn max_power(&self) -> f64 {
        self.segments.iter().map(EfficiencySegment::power).sum()
    }

    pub fn best_slope(&self) -> f64 {
        self.segments.first().map(|s| s.slope).unwrap_or(0.0)
    }

    /// Fills segments in order: `sum_n min(remaining q, width_n) * slope_n`.
    pub fn discharge_to_power(&self, q: f64) -> Result<f64, DomainError> {
        let max = self.max_discharge();
        if !(0.0..=max + 1e-9).contains(&q) {
            return Err(DomainError::DischargeOutOfRange {
                plant: self.id.clone(),
                q,
                max,
            });
        }
        let mut left = q.min(max);
        let mut p = 0.0;
        for s in &self.segments {
            let used = left.min(s.width);
            p += used * s.slope;
            left -= used;
            if left <= 0.0 {
                break;
            }
        }
        Ok(p)
    }

    pub fn power_to_discharge(&self, p: f64) -> Result<f64, DomainError> {
        let max = self.max_power();
        if !(0.0..=max + 1e-9).contains(&p) {
            return Err(DomainError::PowerOutOfRange {
                plant: self.id.clone(),
                p,
                max,
            });
        }
        let mut left = p.min(max);
        let mut q = 0.0;
        for s in &self.segments {
            let seg_p = s.power();
            if left <= seg_p {
                q += left / s.slope;
                return Ok(q);
            }
            q += s.width;
            left -= seg_p;
        }
        Ok(q)
    }

    /// Per-segment discharge obtained by filling segments in order up to power `p`.
    pub fn fill_segments(&self, p: f64) -> Vec<f64> {
        let mut left = p.max(0.0);
        self.segments
            .iter()
            .map(|s| {
                let used = (left / s.slope).min(s.width);
                left -= used * s.slope;
                if left < 1e-12 {
                    left = 0.0;
                }
                used
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub id: String,
    /// Volumes in m3.
    pub r_min: f64,
    pub r_max: f64,
    pub r_init: f64,
    /// EUR/MWh.
    pub water_value: f64,
    /// MW per m3/s used to turn stored volume into energy.
    pub reference_slope: f64,
}

impl Reservoir {
    /// EUR per m3 of water left in the reservoir at the end of the horizon.
    pub fn value_per_m3(&self) -> f64 {
        self.water_value * self.reference_slope / SECONDS_PER_HOUR
    }
}

/// Serial cascade: plant `i` takes water from reservoir `i` and releases it
/// into reservoir `i + 1`; the last plant releases to the sea.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSystem {
    pub reservoirs: Vec<Reservoir>,
    pub plants: Vec<HydroPlant>,
}

impl CascadeSystem {
    pub fn plant_index(&self, id: &str) -> Option<usize> {
        self.plants.iter().position(|p| p.id == id)
    }

    pub fn reservoir_index(&self, id: &str) -> Option<usize> {
        self.reservoirs.iter().position(|r| r.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflowSeries {
    /// Indexed like `CascadeSystem::reservoirs`; m3/s per step.
    pub values: Vec<Vec<f64>>,
}

impl InflowSeries {
    pub fn constant(reservoirs: usize, steps: usize, q: f64) -> Self {
        Self {
            values: vec![vec![q; steps]; reservoirs],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WindRole {
    Forecast,
    Actual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindSeries {
    pub role: WindRole,
    /// MW per step.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommitmentMode {
    Plant,
    Portfolio,
}

impl std::str::FromStr for CommitmentMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "plant" => Ok(Self::Plant),
            "portfolio" => Ok(Self::Portfolio),
            other => Err(format!("unknown mode {other}")),
        }
    }
}

pub const PORTFOLIO_ID: &str = "portfolio";

/// Committed power per entity and step.
///
/// In plant mode there is one series per hydro plant plus, optionally, one
/// for the wind plant. In portfolio mode there is exactly one series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadCommitment {
    pub mode: CommitmentMode,
    pub entities: Vec<String>,
    pub series: Vec<Vec<f64>>,
}

impl LoadCommitment {
    pub fn plant(entities: Vec<String>, series: Vec<Vec<f64>>) -> Self {
        Self {
            mode: CommitmentMode::Plant,
            entities,
            series,
        }
    }

    pub fn get(&self, entity: &str) -> Option<&[f64]> {
        self.entities
            .iter()
            .position(|e| e == entity)
            .map(|k| self.series[k].as_slice())
    }

    /// Portfolio commitment `L_t = sum_i L_{i,t}`; identity for portfolio input.
    pub fn to_portfolio(&self) -> Self {
        if self.mode == CommitmentMode::Portfolio {
            return self.clone();
        }
        let steps = self.series.first().map_or(0, Vec::len);
        let total = (0..steps)
            .map(|t| self.series.iter().map(|s| s[t]).sum())
            .collect();
        Self {
            mode: CommitmentMode::Portfolio,
            entities: vec![PORTFOLIO_ID.to_string()],
            series: vec![total],
        }
    }

    pub fn steps(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeSeries {
    pub entity: String,
    /// MW bought per step.
    pub buy: Vec<f64>,
    /// MW sold per step.
    pub sell: Vec<f64>,
}

impl TradeSeries {
    pub fn net(&self, t: usize) -> f64 {
        self.sell[t] - self.buy[t]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSolution {
    /// MW, `[plant][step]`.
    pub generation: Vec<Vec<f64>>,
    /// m3/s, `[plant][segment][step]`.
    pub segment_discharge: Vec<Vec<Vec<f64>>>,
    /// `[plant][segment][step]`.
    pub segment_flags: Vec<Vec<Vec<bool>>>,
    /// End-of-step volume in m3, `[reservoir][step]`.
    pub reservoir: Vec<Vec<f64>>,
    /// m3/s, `[reservoir][step]`.
    pub spill: Vec<Vec<f64>>,
    pub trades: Vec<TradeSeries>,
    /// EUR.
    pub objective: f64,
}

impl ScheduleSolution {
    pub fn discharge(&self, plant: usize, t: usize) -> f64 {
        self.segment_discharge[plant].iter().map(|s| s[t]).sum()
    }

    pub fn total_generation(&self, t: usize) -> f64 {
        self.generation.iter().map(|g| g[t]).sum()
    }

    pub fn energy(&self, grid: &TimeGrid) -> f64 {
        self.generation.iter().flatten().sum::<f64>() * grid.step_hours()
    }

    /// Spot-priced production plus end-of-horizon water value: the quantity a
    /// schedule is worth without any commitment.
    pub fn spot_value(&self, system: &CascadeSystem, prices: &[f64], grid: &TimeGrid) -> f64 {
        let h = grid.step_hours();
        let production: f64 = self
            .generation
            .iter()
            .map(|g| g.iter().zip(prices).map(|(gi, p)| gi * p * h).sum::<f64>())
            .sum();
        production + end_water_value(system, &self.reservoir)
    }
}

pub fn end_water_value(system: &CascadeSystem, reservoir: &[Vec<f64>]) -> f64 {
    system
        .reservoirs
        .iter()
        .zip(reservoir)
        .map(|(r, traj)| r.value_per_m3() * traj.last().copied().unwrap_or(r.r_init))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub subject: String,
    pub message: String,
}

impl Violation {
    fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

/// Checks every structural invariant of the cascade and its inflow series.
/// An empty result means the data is usable.
pub fn validate_system(
    system: &CascadeSystem,
    inflow: &InflowSeries,
    grid: &TimeGrid,
) -> Vec<Violation> {
    let mut out = Vec::new();
    if grid.steps == 0 {
        out.push(Violation::new("grid", "steps must be at least 1"));
    }
    if !(grid.step_seconds > 0.0) {
        out.push(Violation::new("grid", "step length must be positive"));
    }
    if system.plants.is_empty() {
        out.push(Violation::new("system", "no plants"));
    }
    if system.plants.len() != system.reservoirs.len() {
        out.push(Violation::new(
            "system",
            format!(
                "serial cascade needs one reservoir per plant ({} plants, {} reservoirs)",
                system.plants.len(),
                system.reservoirs.len()
            ),
        ));
    }

    let mut seen = std::collections::HashSet::new();
    for id in system
        .plants
        .iter()
        .map(|p| &p.id)
        .chain(system.reservoirs.iter().map(|r| &r.id))
    {
        if !seen.insert(id.as_str()) {
            out.push(Violation::new(id.clone(), "duplicate id"));
        }
    }

    for r in &system.reservoirs {
        if !(r.r_min <= r.r_init && r.r_init <= r.r_max) {
            out.push(Violation::new(
                &r.id,
                format!(
                    "requires r_min <= r_init <= r_max (got {} / {} / {})",
                    r.r_min, r.r_init, r.r_max
                ),
            ));
        }
        if !(r.water_value >= 0.0) {
            out.push(Violation::new(&r.id, "water value must be nonnegative"));
        }
        if !(r.reference_slope > 0.0) {
            out.push(Violation::new(&r.id, "reference slope must be positive"));
        }
    }

    for (i, p) in system.plants.iter().enumerate() {
        if p.p_min > p.p_max {
            out.push(Violation::new(
                &p.id,
                format!("p_min {} exceeds p_max {}", p.p_min, p.p_max),
            ));
        }
        if p.p_min < 0.0 {
            out.push(Violation::new(&p.id, "p_min must be nonnegative"));
        }
        if p.segments.is_empty() {
            out.push(Violation::new(&p.id, "no efficiency segments"));
        }
        for (n, s) in p.segments.iter().enumerate() {
            if !(s.width > 0.0) {
                out.push(Violation::new(
                    &p.id,
                    format!("segment {n} width must be positive"),
                ));
            }
            if !(s.slope > 0.0) {
                out.push(Violation::new(
                    &p.id,
                    format!("segment {n} slope must be positive"),
                ));
            }
        }
        if p.segments.windows(2).any(|w| w[1].slope >= w[0].slope) {
            out.push(Violation::new(
                &p.id,
                "non-convex efficiency: segment slopes must strictly decrease",
            ));
        }
        if p.max_power() + 1e-9 < p.p_max {
            out.push(Violation::new(
                &p.id,
                format!(
                    "segments reach only {} MW, below p_max {}",
                    p.max_power(),
                    p.p_max
                ),
            ));
        }
        let expect_up = system.reservoirs.get(i).map(|r| r.id.as_str());
        if expect_up != Some(p.upstream_reservoir.as_str()) {
            out.push(Violation::new(
                &p.id,
                format!("upstream reservoir must be reservoir #{i} in a serial cascade"),
            ));
        }
        let expect_down = system.reservoirs.get(i + 1).map(|r| r.id.as_str());
        if p.downstream_reservoir.as_deref() != expect_down {
            out.push(Violation::new(
                &p.id,
                format!(
                    "downstream reservoir must be {}",
                    expect_down.unwrap_or("the sea")
                ),
            ));
        }
    }

    if inflow.values.len() != system.reservoirs.len() {
        out.push(Violation::new(
            "inflow",
            format!(
                "{} series for {} reservoirs",
                inflow.values.len(),
                system.reservoirs.len()
            ),
        ));
    }
    for (m, series) in inflow.values.iter().enumerate() {
        let name = system
            .reservoirs
            .get(m)
            .map_or_else(|| format!("inflow[{m}]"), |r| format!("inflow {}", r.id));
        if series.len() != grid.steps {
            out.push(Violation::new(
                &name,
                format!("{} values, grid has {} steps", series.len(), grid.steps),
            ));
        }
        if series.iter().any(|v| !(*v >= 0.0)) {
            out.push(Violation::new(&name, "inflow must be nonnegative"));
        }
    }
    out
}

pub fn validate_wind(series: &WindSeries, grid: &TimeGrid) -> Vec<Violation> {
    let mut out = Vec::new();
    let name = match series.role {
        WindRole::Forecast => "wind forecast",
        WindRole::Actual => "wind actual",
    };
    if series.values.len() != grid.steps {
        out.push(Violation::new(
            name,
            format!(
                "{} values, grid has {} steps",
                series.values.len(),
                grid.steps
            ),
        ));
    }
    if series.values.iter().any(|v| !(*v >= 0.0)) {
        out.push(Violation::new(name, "wind power must be nonnegative"));
    }
    out
}

/// Independent feasibility audit of a schedule against the cascade model:
/// generation bounds, reservoir bounds and balances, the PQ linking equation
/// and the segment ordering logic. Does not look at any solver internals.
pub fn audit_schedule(
    system: &CascadeSystem,
    inflow: &InflowSeries,
    grid: &TimeGrid,
    sol: &ScheduleSolution,
    tol: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    let dt = grid.step_seconds;
    for (i, p) in system.plants.iter().enumerate() {
        for t in 0..grid.steps {
            let g = sol.generation[i][t];
            let tag = format!("{} t={t}", p.id);
            if g < p.p_min - tol || g > p.p_max + tol {
                out.push(Violation::new(
                    &tag,
                    format!("generation {g} outside bounds"),
                ));
            }
            let linked: f64 = p
                .segments
                .iter()
                .enumerate()
                .map(|(n, s)| s.slope * sol.segment_discharge[i][n][t])
                .sum();
            if (linked - g).abs() > tol * (1.0 + g.abs()) {
                out.push(Violation::new(&tag, format!("linking: {linked} != {g}")));
            }
            for (n, s) in p.segments.iter().enumerate() {
                let q = sol.segment_discharge[i][n][t];
                let mu = sol.segment_flags[i][n][t];
                if q < -tol || q > s.width + tol {
                    out.push(Violation::new(
                        &tag,
                        format!("segment {n} discharge {q} outside [0, Z]"),
                    ));
                }
                if mu && q < s.width - tol {
                    out.push(Violation::new(
                        &tag,
                        format!("segment {n} flagged but not full"),
                    ));
                }
                if n > 0 && q > tol && !sol.segment_flags[i][n - 1][t] {
                    out.push(Violation::new(
                        &tag,
                        format!("segment {n} used before segment {} activated", n - 1),
                    ));
                }
            }
        }
    }
    for (m, r) in system.reservoirs.iter().enumerate() {
        let scale = 1.0 + r.r_max.abs();
        let mut prev = r.r_init;
        for t in 0..grid.steps {
            let vol = sol.reservoir[m][t];
            let tag = format!("{} t={t}", r.id);
            if vol < r.r_min - tol * scale || vol > r.r_max + tol * scale {
                out.push(Violation::new(&tag, format!("volume {vol} outside bounds")));
            }
            let spill = sol.spill[m][t];
            if spill < -tol {
                out.push(Violation::new(&tag, "negative spill"));
            }
            let upstream = if m > 0 { sol.discharge(m - 1, t) } else { 0.0 };
            let own = if m < system.plants.len() {
                sol.discharge(m, t)
            } else {
                0.0
            };
            let expected = prev + (inflow.values[m][t] + upstream - own - spill) * dt;
            if (expected - vol).abs() > tol * scale {
                out.push(Violation::new(
                    &tag,
                    format!("balance: {vol} != {expected}"),
                ));
            }
            prev = vol;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn plant(id: &str, segs: &[(f64, f64)], p_min: f64, p_max: f64) -> HydroPlant {
        HydroPlant {
            id: id.into(),
            p_min,
            p_max,
            segments: segs
                .iter()
                .map(|&(width, slope)| EfficiencySegment { width, slope })
                .collect(),
            upstream_reservoir: "r0".into(),
            downstream_reservoir: None,
        }
    }

    fn reservoir(id: &str) -> Reservoir {
        Reservoir {
            id: id.into(),
            r_min: 0.0,
            r_max: 1e6,
            r_init: 5e5,
            water_value: 20.0,
            reference_slope: 3.0,
        }
    }

    fn two_plant() -> CascadeSystem {
        let mut a = plant("a", &[(10.0, 3.0), (5.0, 2.5)], 5.0, 40.0);
        a.upstream_reservoir = "r0".into();
        a.downstream_reservoir = Some("r1".into());
        let mut b = plant("b", &[(10.0, 2.0)], 0.0, 20.0);
        b.upstream_reservoir = "r1".into();
        CascadeSystem {
            reservoirs: vec![reservoir("r0"), reservoir("r1")],
            plants: vec![a, b],
        }
    }

    #[test]
    fn well_formed_cascade_is_valid() {
        let sys = two_plant();
        let grid = TimeGrid::hourly_from_epoch(4);
        let inflow = InflowSeries::constant(2, 4, 1.0);
        assert!(validate_system(&sys, &inflow, &grid).is_empty());
    }

    #[test]
    fn p_min_above_p_max_is_reported() {
        let mut sys = two_plant();
        sys.plants[1].p_min = 30.0;
        let grid = TimeGrid::hourly_from_epoch(4);
        let inflow = InflowSeries::constant(2, 4, 1.0);
        let v = validate_system(&sys, &inflow, &grid);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].subject, "b");
    }

    #[test]
    fn increasing_slopes_flagged_non_convex() {
        let mut sys = two_plant();
        sys.plants[0].segments[1].slope = 3.5;
        let grid = TimeGrid::hourly_from_epoch(4);
        let inflow = InflowSeries::constant(2, 4, 1.0);
        let v = validate_system(&sys, &inflow, &grid);
        assert!(
            v.iter()
                .any(|v| v.message.contains("non-convex efficiency")),
            "{v:?}"
        );
    }

    #[test]
    fn inflow_length_and_sign_checked() {
        let sys = two_plant();
        let grid = TimeGrid::hourly_from_epoch(4);
        let mut inflow = InflowSeries::constant(2, 4, 1.0);
        inflow.values[0].pop();
        inflow.values[1][2] = -1.0;
        assert_eq!(validate_system(&sys, &inflow, &grid).len(), 2);
    }

    #[test]
    fn zero_discharge_gives_zero_power() {
        let p = plant("p", &[(10.0, 3.0), (5.0, 2.5)], 0.0, 42.5);
        assert_eq!(p.discharge_to_power(0.0).unwrap(), 0.0);
    }

    #[test]
    fn full_capacity_of_140_mw_plant() {
        // widths 21,5,5,5,6 (42 m3/s) with strictly decreasing slopes scaled to 140 MW
        let raw = [(21.0, 4.0), (5.0, 3.4), (5.0, 3.2), (5.0, 3.0), (6.0, 2.5)];
        let total: f64 = raw.iter().map(|(w, s)| w * s).sum();
        let k = 140.0 / total;
        let segs: Vec<(f64, f64)> = raw.iter().map(|&(w, s)| (w, s * k)).collect();
        let p = plant("p", &segs, 68.0, 140.0);
        assert!((p.max_discharge() - 42.0).abs() < 1e-12);
        assert!((p.discharge_to_power(42.0).unwrap() - 140.0).abs() < 1e-9);
    }

    #[test]
    fn mid_segment_interpolation() {
        // 10 m3/s at 3 MW/(m3/s), then 5 m3/s at 2 MW/(m3/s).
        // q = 12.5: 10*3 + 2.5*2 = 35
        let p = plant("p", &[(10.0, 3.0), (5.0, 2.0)], 0.0, 40.0);
        assert!((p.discharge_to_power(12.5).unwrap() - 35.0).abs() < 1e-12);
        // q = 4: 12
        assert!((p.discharge_to_power(4.0).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_discharge_is_error() {
        let p = plant("p", &[(10.0, 3.0)], 0.0, 30.0);
        assert!(matches!(
            p.discharge_to_power(10.5),
            Err(DomainError::DischargeOutOfRange { .. })
        ));
        assert!(p.discharge_to_power(-0.1).is_err());
        assert!(p.power_to_discharge(31.0).is_err());
    }

    #[test]
    fn portfolio_commitment_sums_plants() {
        let c = LoadCommitment::plant(
            vec!["a".into(), "b".into(), "wind".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![0.5, 0.25]],
        );
        let p = c.to_portfolio();
        assert_eq!(p.mode, CommitmentMode::Portfolio);
        assert_eq!(p.series, vec![vec![4.5, 6.25]]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn concave_plant() -> impl Strategy<Value = HydroPlant> {
            proptest::collection::vec((0.5f64..20.0, 0.1f64..1.0), 1..6).prop_map(|raw| {
                // cumulative products of factors < 1 give strictly decreasing slopes
                let mut slope = 5.0;
                let segs: Vec<(f64, f64)> = raw
                    .into_iter()
                    .map(|(w, f)| {
                        let s = slope;
                        slope *= f.min(0.95);
                        (w, s)
                    })
                    .collect();
                let max: f64 = segs.iter().map(|(w, s)| w * s).sum();
                plant("p", &segs, 0.0, max)
            })
        }

        proptest! {
            #[test]
            fn power_discharge_round_trip(p in concave_plant(), frac in 0.0f64..=1.0) {
                let q = frac * p.max_discharge();
                let back = p.power_to_discharge(p.discharge_to_power(q).unwrap()).unwrap();
                prop_assert!((back - q).abs() <= 1e-9 * (1.0 + q));
            }

            #[test]
            fn pq_curve_concave_and_nondecreasing(p in concave_plant()) {
                let n = 200;
                let h = p.max_discharge() / n as f64;
                let vals: Vec<f64> = (0..=n)
                    .map(|k| p.discharge_to_power((k as f64 * h).min(p.max_discharge())).unwrap())
                    .collect();
                for w in vals.windows(2) {
                    prop_assert!(w[1] >= w[0] - 1e-12);
                }
                for w in vals.windows(3) {
                    prop_assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9);
                }
            }

            #[test]
            fn portfolio_sum_is_exact(series in proptest::collection::vec(
                proptest::collection::vec(0.0f64..100.0, 6), 1..5)) {
                let ids = (0..series.len()).map(|k| format!("e{k}")).collect();
                let c = LoadCommitment::plant(ids, series.clone());
                let p = c.to_portfolio();
                for t in 0..6 {
                    let expect: f64 = series.iter().map(|s| s[t]).sum();
                    prop_assert_eq!(p.series[0][t], expect);
                }
            }
        }
    }
}
