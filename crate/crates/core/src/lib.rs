//! Next-day stock price forecasting with feedforward networks trained by
//! population metaheuristics (symbiotic organisms search, particle swarm,
//! genetic algorithm), benchmarked against an ARIMA baseline.
//!
//! The crate is organised bottom-up:
//!
//! * [`marketdata`] loads daily OHLC CSV files and turns them into
//!   normalized next-day supervised pairs.
//! * [`ffnn`] is the fixed 2-8-2 network and its RMSE training fitness.
//! * [`metaheuristics`] holds the three optimizers behind a common
//!   [`Objective`](metaheuristics::Objective) trait.
//! * [`arima`] fits ARIMA(p,d,q) by conditional sum of squares.
//! * [`metrics`] implements RMSE, MAPE, MAD and MSE.
//! * [`harness`] runs seeded replications and persists their results.
//! * [`plot`] renders actual-vs-predicted SVG charts.
//!
//! With the default `parallel` feature, independent work (replications,
//! GA offspring evaluation, ARIMA grid entries) is spread over a rayon
//! pool. Results are bit-identical to the sequential path.

// `!(a < b)` also rejects NaN, which is the point in config validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arima;
pub mod error;
pub mod exec;
pub mod ffnn;
pub mod harness;
pub mod marketdata;
pub mod metaheuristics;
pub mod metrics;
pub mod plot;
pub mod synthetic;

pub use error::{Error, Result};
pub use exec::Execution;
