//! Time-series construction, autocorrelation and stationarity diagnostics,
//! and ARIMA modelling.

pub mod acf;
pub mod arima;
pub mod kpss;
pub mod series;

pub use acf::{acf, ljung_box, LjungBoxLag, LjungBoxResult};
pub use arima::{
    auto_fit, fit_arima, forecast, residual_diagnostics, ArimaModel, ArimaSpec, Forecast,
    PredictionInterval,
};
pub use kpss::{kpss_statistic, kpss_test, ndiffs, seasonal_strength, CriticalValues, KpssResult};
pub use series::{build_series, difference, integrate, SeriesSpec, TimeSeries, TimeSpec};
