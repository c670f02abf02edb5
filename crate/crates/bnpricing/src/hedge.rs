//! Delta hedging of the fair put and a rebalance-at-observations backtest.
//!
//! In the two-asset market (savings account and stock index, both in
//! savings-account-discounted units) the replicating portfolio collapses to
//! the familiar form: hold `fair_put_delta` units of stock and park the
//! remainder of the portfolio value in savings units. The general
//! numeraire-changed hedging system, which solves
//! `Phi^T diag(S~) delta = (H~, -x)` with a ones row and a row of
//! benchmarked volatilities, is provided as [`phi_hedge_units`] for the
//! one-factor two-asset case; the unit tests verify that it reproduces the
//! reduced form exactly on the put.
//!
//! The backtest walks an observed index series, initializes its portfolio at
//! either the fair or the classical risk-neutral price, rebalances to the
//! fair delta at every observation before maturity, and reports the
//! trajectories, the terminal tracking error against the payoff, and the
//! running worst gap to the fair value curve. Because the two initial-value
//! rules share every delta, the risk-neutral portfolio carries the initial
//! price gap through to maturity as surplus in savings units.

use crate::calibrate::IndexSeries;
use crate::mmm::{
    fair_put_delta, fair_put_price, risk_neutral_put_price, MmmError, MmmParams, PutContract,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HedgeError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("series does not match contract: {0}")]
    SeriesContractMismatch(String),
    #[error(transparent)]
    Model(#[from] MmmError),
}

/// Holdings of a self-financing hedge at one instant, in discounted units:
/// `value = units_savings + units_stock * s` at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgePosition {
    pub units_savings: f64,
    pub units_stock: f64,
    pub value: f64,
}

/// Price rule used to seed the hedge portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialValueRule {
    /// Minimal replication price; the cheapest self-financing start.
    Fair,
    /// Classical risk-neutral price; starts above fair by the strike times
    /// the savings-bond defect.
    RiskNeutral,
}

/// Rebalances a portfolio worth `current_value` into the put-replicating
/// position at (t, s): the fair delta in stock, the remainder in savings.
pub fn hedge_position(
    params: &MmmParams,
    t: f64,
    s: f64,
    contract: &PutContract,
    current_value: f64,
) -> Result<HedgePosition, HedgeError> {
    if !(t < contract.maturity) {
        return Err(HedgeError::Domain(format!(
            "rebalancing requires t < maturity, got t={t}, maturity={}",
            contract.maturity
        )));
    }
    if !current_value.is_finite() {
        return Err(HedgeError::Domain(format!("portfolio value {current_value} is not finite")));
    }
    let delta = fair_put_delta(params, t, s, contract)?;
    Ok(HedgePosition {
        units_savings: current_value - delta * s,
        units_stock: delta,
        value: current_value,
    })
}

/// Hedge weights from the general benchmarked system in the one-factor,
/// two-asset case. `benchmarked_prices` and `benchmarked_vols` describe the
/// two traded assets denominated in the numeraire portfolio;
/// `benchmarked_value` is the claim's numeraire-denominated price and
/// `integrand` the coefficient x of its martingale representation
/// `d(claim) = -x dW`. Solves
///
/// ```text
/// [ 1    1  ] [ y0 ]   [ benchmarked_value ]          y_j
/// [ v0   v1 ] [ y1 ] = [ -integrand        ],  delta_j = ----
///                                                       S~_j
/// ```
pub fn phi_hedge_units(
    benchmarked_prices: &[f64; 2],
    benchmarked_vols: &[f64; 2],
    benchmarked_value: f64,
    integrand: f64,
) -> Result<[f64; 2], HedgeError> {
    let [p0, p1] = *benchmarked_prices;
    let [v0, v1] = *benchmarked_vols;
    if !(p0.abs() > 0.0) || !(p1.abs() > 0.0) || !p0.is_finite() || !p1.is_finite() {
        return Err(HedgeError::Domain(
            "benchmarked prices must be nonzero and finite".into(),
        ));
    }
    let det = v0 - v1;
    let scale = 1.0 + v0.abs() + v1.abs();
    if !det.is_finite() || det.abs() <= 1e-12 * scale {
        return Err(HedgeError::Domain(format!(
            "volatility rows are degenerate (v0={v0}, v1={v1}); the claim is not replicable \
             from these two assets"
        )));
    }
    let rhs = -integrand;
    let y0 = (rhs - v1 * benchmarked_value) / det;
    let y1 = benchmarked_value - y0;
    Ok([y0 / p0, y1 / p1])
}

/// Trajectories and error measures of one hedging run.
#[derive(Debug, Clone, PartialEq)]
pub struct BacktestReport {
    pub times: Vec<f64>,
    pub index_levels: Vec<f64>,
    /// Fair put value at each observation.
    pub option_values: Vec<f64>,
    /// Self-financing hedge value at each observation.
    pub portfolio_values: Vec<f64>,
    /// Delta used at each observation (at maturity: the one-sided intrinsic
    /// slope, reported for completeness, never traded on).
    pub deltas: Vec<f64>,
    pub terminal_payoff: f64,
    /// |portfolio - payoff| at maturity.
    pub tracking_error: f64,
    /// Running maximum |portfolio - fair value| over the whole run.
    pub max_abs_gap: f64,
    pub rebalance_count: usize,
}

/// Runs the delta hedge along an observed series. The last observation must
/// coincide with the contract maturity; rebalancing happens at every
/// observation strictly before it.
pub fn backtest(
    params: &MmmParams,
    series: &IndexSeries,
    contract: &PutContract,
    rule: InitialValueRule,
) -> Result<BacktestReport, HedgeError> {
    let maturity = contract.maturity;
    let tol = 1e-9 * (1.0 + maturity.abs());
    let times = series.times();
    let levels = series.values();
    let t_last = *times.last().unwrap();
    if (t_last - maturity).abs() > tol {
        return Err(HedgeError::SeriesContractMismatch(format!(
            "last observation at t={t_last} but contract matures at {maturity}"
        )));
    }
    if times[0] < 0.0 {
        return Err(HedgeError::SeriesContractMismatch(format!(
            "series starts before inception (t={})",
            times[0]
        )));
    }

    let n = series.len();
    let mut option_values = Vec::with_capacity(n);
    let mut portfolio_values = Vec::with_capacity(n);
    let mut deltas = Vec::with_capacity(n);
    let mut max_abs_gap: f64 = 0.0;
    let mut rebalance_count = 0usize;
    let mut units_savings = 0.0;
    let mut units_stock = 0.0;
    let mut value = 0.0;

    for i in 0..n {
        // Observations inside the maturity tolerance price as at maturity.
        let t = times[i].min(maturity);
        let s = levels[i];
        if i == 0 {
            value = match rule {
                InitialValueRule::Fair => fair_put_price(params, t, s, contract)?,
                InitialValueRule::RiskNeutral => risk_neutral_put_price(params, t, s, contract)?,
            };
        } else {
            value = units_savings + units_stock * s;
        }
        let fair = fair_put_price(params, t, s, contract)?;
        option_values.push(fair);
        portfolio_values.push(value);
        max_abs_gap = max_abs_gap.max((value - fair).abs());
        if t < maturity {
            let pos = hedge_position(params, t, s, contract, value)?;
            // Self-financing: rebalancing must not create or destroy value.
            let recomposed = pos.units_savings + pos.units_stock * s;
            assert!(
                (recomposed - value).abs() <= 1e-12 * (1.0 + value.abs()),
                "rebalance changed the portfolio value: {recomposed} vs {value}"
            );
            units_savings = pos.units_savings;
            units_stock = pos.units_stock;
            deltas.push(pos.units_stock);
            rebalance_count += 1;
        } else {
            deltas.push(fair_put_delta(params, maturity, s, contract)?);
        }
    }

    let terminal_level = *levels.last().unwrap();
    let terminal_payoff = (contract.strike - terminal_level).max(0.0);
    Ok(BacktestReport {
        times: times.to_vec(),
        index_levels: levels.to_vec(),
        option_values,
        portfolio_values,
        deltas,
        terminal_payoff,
        tracking_error: (value - terminal_payoff).abs(),
        max_abs_gap,
        rebalance_count,
    })
}
