//! Data exploration and time-series forecasting engine.
//!
//! * [`table`]: CSV ingestion into immutable typed tables.
//! * [`ops`]: filtering, selection, grouping and descriptive summaries.
//! * [`charts`]: chart-ready data and a small SVG renderer.
//! * [`timeseries`]: autocorrelation diagnostics, KPSS-based differencing,
//!   ARIMA/SARIMA maximum likelihood and forecasting.

pub mod charts;
pub mod error;
pub mod ops;
pub mod special;
pub mod stats;
pub mod table;
pub mod timeseries;

pub use error::{Error, Result};
