//! Imbalance settlement: direction-dependent imbalance prices, the cost of an
//! imperfect forecast relative to spot, and per-scenario cost reports.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::fmt_num;
use crate::market::{Fill, QuoteLadder, Side};

#[derive(Debug, Error, PartialEq)]
pub enum SettlementError {
    #[error("total actual production is zero")]
    ZeroProduction,
    #[error("series lengths differ: {0} vs {1}")]
    Length(usize, usize),
    #[error("step {step}: need system buy {sb} >= spot {spot} >= system sell {ss}")]
    PriceOrder {
        step: usize,
        sb: f64,
        spot: f64,
        ss: f64,
    },
}

/// Per-step spot and two-price imbalance prices, EUR/MWh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlementPrices {
    pub spot: Vec<f64>,
    pub system_buy: Vec<f64>,
    pub system_sell: Vec<f64>,
}

impl SettlementPrices {
    pub fn new(
        spot: Vec<f64>,
        system_buy: Vec<f64>,
        system_sell: Vec<f64>,
    ) -> Result<Self, SettlementError> {
        if system_buy.len() != spot.len() {
            return Err(SettlementError::Length(spot.len(), system_buy.len()));
        }
        if system_sell.len() != spot.len() {
            return Err(SettlementError::Length(spot.len(), system_sell.len()));
        }
        for t in 0..spot.len() {
            if !(system_buy[t] >= spot[t] && spot[t] >= system_sell[t]) {
                return Err(SettlementError::PriceOrder {
                    step: t,
                    sb: system_buy[t],
                    spot: spot[t],
                    ss: system_sell[t],
                });
            }
        }
        Ok(Self {
            spot,
            system_buy,
            system_sell,
        })
    }

    /// System buy at the best ask and system sell at the best bid, each
    /// clamped to spot so that deviations are never rewarded. A side with no
    /// quotes settles at spot.
    pub fn from_quotes(spot: &[f64], quotes: &QuoteLadder) -> Self {
        let n = spot.len().min(quotes.len());
        Self {
            spot: spot[..n].to_vec(),
            system_buy: (0..n)
                .map(|t| quotes.best_ask(t).unwrap_or(spot[t]).max(spot[t]))
                .collect(),
            system_sell: (0..n)
                .map(|t| quotes.best_bid(t).unwrap_or(spot[t]).min(spot[t]))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.spot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spot.is_empty()
    }
}

/// System buy price when short, system sell price when long, spot when balanced.
pub fn imbalance_price(q_act: f64, q_forc: f64, prices: &SettlementPrices, step: usize) -> f64 {
    if q_act < q_forc {
        prices.system_buy[step]
    } else if q_act > q_forc {
        prices.system_sell[step]
    } else {
        prices.spot[step]
    }
}

/// `-(q_act - q_forc) * (pi_imb - pi_spot)` in EUR for energies in MWh.
pub fn cost_imperfect(q_act: f64, q_forc: f64, prices: &SettlementPrices, step: usize) -> f64 {
    let pi = imbalance_price(q_act, q_forc, prices, step);
    -(q_act - q_forc) * (pi - prices.spot[step])
}

fn check_lengths(
    q_act: &[f64],
    q_forc: &[f64],
    prices: &SettlementPrices,
) -> Result<(), SettlementError> {
    if q_act.len() != q_forc.len() {
        return Err(SettlementError::Length(q_act.len(), q_forc.len()));
    }
    if q_act.len() != prices.len() {
        return Err(SettlementError::Length(q_act.len(), prices.len()));
    }
    Ok(())
}

/// Total cost of imperfect forecast per MWh actually produced.
pub fn average_cost(
    q_act: &[f64],
    q_forc: &[f64],
    prices: &SettlementPrices,
) -> Result<f64, SettlementError> {
    check_lengths(q_act, q_forc, prices)?;
    let produced: f64 = q_act.iter().sum();
    if produced == 0.0 {
        return Err(SettlementError::ZeroProduction);
    }
    let total: f64 = (0..q_act.len())
        .map(|t| cost_imperfect(q_act[t], q_forc[t], prices, t))
        .sum();
    Ok(total / produced)
}

/// One-price style metric `-sum (q_act - q_forc) * pi_imb / sum q_act`, with
/// `pi_imb` chosen by direction as in [`imbalance_price`].
pub fn one_price_average(
    q_act: &[f64],
    q_forc: &[f64],
    prices: &SettlementPrices,
) -> Result<f64, SettlementError> {
    check_lengths(q_act, q_forc, prices)?;
    let produced: f64 = q_act.iter().sum();
    if produced == 0.0 {
        return Err(SettlementError::ZeroProduction);
    }
    let total: f64 = (0..q_act.len())
        .map(|t| -(q_act[t] - q_forc[t]) * imbalance_price(q_act[t], q_forc[t], prices, t))
        .sum();
    Ok(total / produced)
}

/// Cost of a fill relative to trading the same energy at spot.
pub fn fill_cost(fill: &Fill, spot: f64) -> f64 {
    match fill.side {
        Side::Buy => fill.volume * (fill.price - spot),
        Side::Sell => fill.volume * (spot - fill.price),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceReport {
    pub scenario: String,
    /// Intraday trades and residual imbalance settled against spot, EUR per step.
    pub trading: Vec<f64>,
    /// Value given up by moving hydro away from its unconstrained schedule,
    /// EUR per step; the end-reservoir part is booked on the last step.
    pub reschedule: Vec<f64>,
    pub fees: Vec<f64>,
    /// Sum of the three components, EUR per step.
    pub cost: Vec<f64>,
    pub total: f64,
    /// Actual production, MWh.
    pub production: f64,
    /// EUR per MWh of actual production.
    pub average: f64,
    /// Day-ahead income the percentage refers to, EUR.
    pub income: f64,
    pub percent_of_income: f64,
}

impl ImbalanceReport {
    pub fn new(
        scenario: impl Into<String>,
        trading: Vec<f64>,
        reschedule: Vec<f64>,
        fees: Vec<f64>,
        production: f64,
        income: f64,
    ) -> Result<Self, SettlementError> {
        if reschedule.len() != trading.len() {
            return Err(SettlementError::Length(trading.len(), reschedule.len()));
        }
        if fees.len() != trading.len() {
            return Err(SettlementError::Length(trading.len(), fees.len()));
        }
        if production == 0.0 {
            return Err(SettlementError::ZeroProduction);
        }
        let cost: Vec<f64> = (0..trading.len())
            .map(|t| trading[t] + reschedule[t] + fees[t])
            .collect();
        let total: f64 = cost.iter().sum();
        let percent_of_income = if income == 0.0 {
            0.0
        } else {
            100.0 * total / income
        };
        Ok(Self {
            scenario: scenario.into(),
            trading,
            reschedule,
            fees,
            cost,
            total,
            production,
            average: total / production,
            income,
            percent_of_income,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    /// Individual without re-optimisation, individual with hydro
    /// re-optimised (the base case), common reactive, common proactive.
    pub reports: [ImbalanceReport; 4],
}

pub const SCENARIO_NAMES: [&str; 4] = [
    "individual, no re-optimisation",
    "individual, hydro re-optimised",
    "common, reactive netting",
    "common, proactive re-optimisation",
];

impl ScenarioComparison {
    pub const BASE: usize = 1;

    pub fn costs(&self) -> [f64; 4] {
        std::array::from_fn(|k| self.reports[k].total)
    }

    /// Cost of the base case minus cost of scenario `k`.
    pub fn savings(&self, k: usize) -> f64 {
        self.reports[Self::BASE].total - self.reports[k].total
    }

    /// `scenario,total_eur,average_eur_mwh,percent_of_income,savings_eur`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "scenario",
            "name",
            "total_eur",
            "average_eur_mwh",
            "percent_of_income",
            "savings_eur",
        ])?;
        for (k, r) in self.reports.iter().enumerate() {
            out.write_record([
                (k + 1).to_string(),
                r.scenario.clone(),
                fmt_num(r.total),
                fmt_num(r.average),
                fmt_num(r.percent_of_income),
                fmt_num(self.savings(k)),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `step,scenario_1,...,scenario_4` hourly cost table.
    pub fn write_hourly_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "step",
            "scenario_1",
            "scenario_2",
            "scenario_3",
            "scenario_4",
        ])?;
        for t in 0..self.reports[0].cost.len() {
            let mut rec = vec![t.to_string()];
            rec.extend(self.reports.iter().map(|r| fmt_num(r.cost[t])));
            out.write_record(rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for ScenarioComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<3} {:<36} {:>12} {:>12} {:>10} {:>12}",
            "#", "scenario", "IBC [EUR]", "avg [E/MWh]", "% income", "saving [EUR]"
        )?;
        for (k, r) in self.reports.iter().enumerate() {
            let saving = if k > Self::BASE {
                format!("{:.2}", self.savings(k))
            } else {
                "-".into()
            };
            writeln!(
                f,
                "{:<3} {:<36} {:>12.2} {:>12.4} {:>10.4} {:>12}",
                k + 1,
                r.scenario,
                r.total,
                r.average,
                r.percent_of_income,
                saving
            )?;
        }
        Ok(())
    }
}
