//! Intraday market: synthetic quote surfaces, tiered order-book snapshots,
//! pay-as-bid clearing and fees.

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use thiserror::Error;

use crate::io::fmt_num;

#[derive(Debug, Error)]
pub enum MarketError {
    #[error("invalid quote parameter: {0}")]
    Parameter(String),
    #[error("spot price must be positive at step {0}")]
    NonPositiveSpot(usize),
    #[error("series length mismatch: {0} spot prices, {1} imbalance values")]
    Length(usize, usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed quote file: {0}")]
    Malformed(String),
}

/// Side of an incoming order. A buy consumes ask tiers, a sell consumes bid tiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "BUY",
            Side::Sell => "SELL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tier {
    /// Position in the original ladder, 0 = best.
    pub tier: usize,
    pub price: f64,
    /// MWh.
    pub volume: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuoteStep {
    /// Sell offers, cheapest first.
    pub asks: Vec<Tier>,
    /// Buy interest, highest first.
    pub bids: Vec<Tier>,
}

/// Per-step snapshot of a pay-as-bid order book.
///
/// `clear` mutates the book, so concurrent users must serialize access or
/// work on their own clone.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuoteLadder {
    pub steps: Vec<QuoteStep>,
}

impl QuoteLadder {
    pub fn empty(steps: usize) -> Self {
        Self {
            steps: vec![QuoteStep::default(); steps],
        }
    }

    /// Flat book with one tier per side and the given depth.
    pub fn flat(bid: &[f64], ask: &[f64], volume: f64) -> Self {
        Self {
            steps: bid
                .iter()
                .zip(ask)
                .map(|(&b, &a)| QuoteStep {
                    asks: vec![Tier {
                        tier: 0,
                        price: a,
                        volume,
                    }],
                    bids: vec![Tier {
                        tier: 0,
                        price: b,
                        volume,
                    }],
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn best_ask(&self, t: usize) -> Option<f64> {
        self.steps[t].asks.first().map(|x| x.price)
    }

    pub fn best_bid(&self, t: usize) -> Option<f64> {
        self.steps[t].bids.first().map(|x| x.price)
    }

    pub fn ask_depth(&self, t: usize) -> f64 {
        self.steps[t].asks.iter().map(|x| x.volume).sum()
    }

    pub fn bid_depth(&self, t: usize) -> f64 {
        self.steps[t].bids.iter().map(|x| x.volume).sum()
    }

    /// Invariant check: positive spread, positive volumes, ordered prices.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (t, s) in self.steps.iter().enumerate() {
            if let (Some(b), Some(a)) = (s.bids.first(), s.asks.first()) {
                if b.price >= a.price {
                    out.push(format!(
                        "step {t}: best bid {} >= best ask {}",
                        b.price, a.price
                    ));
                }
            }
            if s.asks.iter().chain(&s.bids).any(|x| !(x.volume > 0.0)) {
                out.push(format!("step {t}: tier volumes must be positive"));
            }
            if s.asks.windows(2).any(|w| w[1].price < w[0].price) {
                out.push(format!("step {t}: ask prices must be ascending"));
            }
            if s.bids.windows(2).any(|w| w[1].price > w[0].price) {
                out.push(format!("step {t}: bid prices must be descending"));
            }
        }
        out
    }

    /// Pay-as-bid tier walk. Buys lift asks priced at or below the limit,
    /// sells hit bids priced at or above it, best tier first. Consumed volume
    /// is removed from the book so later orders see only what is left.
    pub fn clear(&mut self, order: &Order) -> ClearOutcome {
        let mut left = order.volume.max(0.0);
        let mut fills = Vec::new();
        let step = &mut self.steps[order.step];
        let tiers = match order.side {
            Side::Buy => &mut step.asks,
            Side::Sell => &mut step.bids,
        };
        for tier in tiers.iter_mut() {
            if left <= 0.0 {
                break;
            }
            let crosses = match order.side {
                Side::Buy => tier.price <= order.limit,
                Side::Sell => tier.price >= order.limit,
            };
            if !crosses {
                break;
            }
            let take = left.min(tier.volume);
            if take <= 0.0 {
                continue;
            }
            fills.push(Fill {
                step: order.step,
                side: order.side,
                price: tier.price,
                volume: take,
                counter_tier: tier.tier,
            });
            tier.volume -= take;
            left -= take;
        }
        tiers.retain(|x| x.volume > 1e-12);
        ClearOutcome {
            fills,
            unfilled: left.max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub step: usize,
    pub side: Side,
    /// MWh.
    pub volume: f64,
    /// Worst acceptable price; use `f64::INFINITY` / `0.0` for market orders.
    pub limit: f64,
}

impl Order {
    pub fn market(step: usize, side: Side, volume: f64) -> Self {
        let limit = match side {
            Side::Buy => f64::INFINITY,
            Side::Sell => f64::NEG_INFINITY,
        };
        Self {
            step,
            side,
            volume,
            limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub step: usize,
    pub side: Side,
    pub price: f64,
    pub volume: f64,
    pub counter_tier: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearOutcome {
    pub fills: Vec<Fill>,
    pub unfilled: f64,
}

impl ClearOutcome {
    pub fn filled(&self) -> f64 {
        self.fills.iter().map(|f| f.volume).sum()
    }

    /// Cash paid (buy) or received (sell), each fill at its own price.
    pub fn cash(&self) -> f64 {
        self.fills.iter().map(|f| f.price * f.volume).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeeSchedule {
    /// EUR/MWh traded.
    pub trade_fee: f64,
    /// EUR/MWh of residual imbalance.
    pub imbalance_fee: f64,
}

impl Default for FeeSchedule {
    fn default() -> Self {
        Self {
            trade_fee: 0.15,
            imbalance_fee: 0.30,
        }
    }
}

impl FeeSchedule {
    pub fn zero() -> Self {
        Self {
            trade_fee: 0.0,
            imbalance_fee: 0.0,
        }
    }
}

pub fn apply_fees(fills: &[Fill], residual_imbalance: f64, fees: &FeeSchedule) -> f64 {
    let traded: f64 = fills.iter().map(|f| f.volume).sum();
    fees.trade_fee * traded + fees.imbalance_fee * residual_imbalance.abs()
}

/// Signed MW difference between the late and early views of inflow and wind.
/// Positive means the system is long (surplus).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemImbalanceSeries {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuoteParams {
    /// Half-spread as a fraction of spot.
    pub spread_frac: f64,
    /// Price shift per MW of system imbalance, as a fraction of spot.
    pub sensitivity: f64,
    pub depth: usize,
    /// MWh per tier.
    pub tier_volume: f64,
}

impl Default for QuoteParams {
    fn default() -> Self {
        Self {
            spread_frac: 0.15,
            sensitivity: 0.01,
            depth: 3,
            tier_volume: 25.0,
        }
    }
}

impl QuoteParams {
    pub fn check(&self) -> Result<(), MarketError> {
        if !(self.spread_frac > 0.0 && self.spread_frac < 1.0) {
            return Err(MarketError::Parameter(format!(
                "spread_frac {} not in (0, 1)",
                self.spread_frac
            )));
        }
        if !(self.sensitivity >= 0.0) {
            return Err(MarketError::Parameter(format!(
                "sensitivity {} must be >= 0",
                self.sensitivity
            )));
        }
        if self.depth == 0 {
            return Err(MarketError::Parameter("depth must be at least 1".into()));
        }
        if !(self.tier_volume > 0.0) {
            return Err(MarketError::Parameter(
                "tier_volume must be positive".into(),
            ));
        }
        Ok(())
    }
}

const BID_FLOOR_FRAC: f64 = 0.05;
const MIN_SPREAD_FRAC: f64 = 0.01;

/// Builds the synthetic quote surface around spot.
///
/// Best ask is `spot * (1 + spread - k * imb)` and best bid
/// `spot * (1 - spread - k * imb)`, so a long system pushes both sides down.
/// The bid is floored at 5 % of spot and the ask kept at least 1 % of spot
/// above the bid. Each deeper tier sits a further `spread / 2 * spot` away.
pub fn synthesize_quotes(
    spot: &[f64],
    sys_imb: &SystemImbalanceSeries,
    params: &QuoteParams,
) -> Result<QuoteLadder, MarketError> {
    params.check()?;
    if spot.len() != sys_imb.values.len() {
        return Err(MarketError::Length(spot.len(), sys_imb.values.len()));
    }
    let mut steps = Vec::with_capacity(spot.len());
    for (t, (&s, &imb)) in spot.iter().zip(&sys_imb.values).enumerate() {
        if !(s > 0.0) {
            return Err(MarketError::NonPositiveSpot(t));
        }
        let shift = params.sensitivity * imb;
        let bid0 = (s * (1.0 - params.spread_frac - shift)).max(BID_FLOOR_FRAC * s);
        let ask0 = (s * (1.0 + params.spread_frac - shift)).max(bid0 + MIN_SPREAD_FRAC * s);
        let step = params.spread_frac / 2.0 * s;
        let asks = (0..params.depth)
            .map(|k| Tier {
                tier: k,
                price: ask0 + k as f64 * step,
                volume: params.tier_volume,
            })
            .collect();
        let bids = (0..params.depth)
            .map(|k| Tier {
                tier: k,
                price: (bid0 - k as f64 * step).max(0.0),
                volume: params.tier_volume,
            })
            .collect();
        steps.push(QuoteStep { asks, bids });
    }
    Ok(QuoteLadder { steps })
}

#[derive(Debug, Serialize, Deserialize)]
struct QuoteRecord {
    step: usize,
    side: String,
    tier: usize,
    price_eur_mwh: f64,
    volume_mwh: f64,
}

/// `step,side,tier,price_eur_mwh,volume_mwh`; side is `ASK` or `BID`.
pub fn write_quotes_csv<W: Write>(book: &QuoteLadder, w: W) -> Result<(), MarketError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "side", "tier", "price_eur_mwh", "volume_mwh"])?;
    for (t, s) in book.steps.iter().enumerate() {
        for (side, tiers) in [("ASK", &s.asks), ("BID", &s.bids)] {
            for x in tiers {
                out.write_record([
                    t.to_string(),
                    side.to_string(),
                    x.tier.to_string(),
                    fmt_num(x.price),
                    fmt_num(x.volume),
                ])?;
            }
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_quotes_csv<R: Read>(r: R, steps: usize) -> Result<QuoteLadder, MarketError> {
    let mut book = QuoteLadder::empty(steps);
    let mut rdr = csv::Reader::from_reader(r);
    for rec in rdr.deserialize::<QuoteRecord>() {
        let rec = rec?;
        if rec.step >= steps {
            return Err(MarketError::Malformed(format!(
                "step {} beyond grid of {steps}",
                rec.step
            )));
        }
        let tier = Tier {
            tier: rec.tier,
            price: rec.price_eur_mwh,
            volume: rec.volume_mwh,
        };
        match rec.side.as_str() {
            "ASK" => book.steps[rec.step].asks.push(tier),
            "BID" => book.steps[rec.step].bids.push(tier),
            other => return Err(MarketError::Malformed(format!("unknown side {other}"))),
        }
    }
    for s in &mut book.steps {
        s.asks
            .sort_by(|a, b| a.price.total_cmp(&b.price).then(a.tier.cmp(&b.tier)));
        s.bids
            .sort_by(|a, b| b.price.total_cmp(&a.price).then(a.tier.cmp(&b.tier)));
    }
    Ok(book)
}

/// `step,side,price,volume,counter_tier`.
pub fn write_fills_csv<W: Write>(fills: &[Fill], w: W) -> Result<(), MarketError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["step", "side", "price", "volume", "counter_tier"])?;
    for f in fills {
        out.write_record([
            f.step.to_string(),
            f.side.as_str().to_string(),
            fmt_num(f.price),
            fmt_num(f.volume),
            f.counter_tier.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}
