//! Pricing and hedging under the growth-optimal numeraire, with the
//! minimal market model for index dynamics.
//!
//! The library covers the pipeline end to end: solving for growth-optimal
//! portfolio weights from market coefficients ([`market`]), the special
//! functions behind noncentral chi-square laws ([`special`]), closed-form
//! fair and risk-neutral put prices ([`mmm`]), trendline calibration from
//! index data ([`calibrate`]), exact and Euler path simulation with
//! deterministic parallel Monte Carlo ([`simulate`]), delta-hedge
//! construction and backtesting ([`hedge`]), and SVG chart output
//! ([`plot`]). The [`app`] module exposes all of it as a command-line tool.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! * `gop_solver` - growth-optimal weights, Sharpe ratios, market extension
//! * `special_functions` - noncentral chi-square CDF values and sampling
//! * `put_pricing` - fair vs risk-neutral prices and the savings-bond defect
//! * `mc_cross_check` - closed form against exact-transition Monte Carlo
//! * `calibrate_series` - trendline fit on a synthetic index series
//! * `simulate_paths` - real-world Euler paths and their realized activity
//! * `martingale_check` - the density process stays mean one under Euler
//! * `hedging_backtest` - daily delta hedge along a simulated path
//! * `growth_comparison` - long-horizon growth of the GOP vs a rival mix

// Negated comparisons (`!(x > 0.0)`) are deliberate: they reject NaN along
// with the out-of-range values. Frozen reference constants keep their full
// published digits even where f64 rounds them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

pub mod app;
pub mod calibrate;
pub mod hedge;
pub mod market;
pub mod mmm;
pub mod plot;
pub mod simulate;
pub mod special;
