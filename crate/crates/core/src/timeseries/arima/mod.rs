//! ARIMA/SARIMA estimation by exact maximum likelihood, automatic order
//! selection and forecasting.

mod auto;
mod fit;
mod forecast;
pub mod kalman;
pub mod optim;
pub mod poly;
mod simulate;
mod spec;

pub use auto::{
    auto_fit, choose_differencing, AutoDifferencing, AUTO_MIN_OBS, SEASONAL_STRENGTH_THRESHOLD,
};
pub use fit::{fit_arima, residual_diagnostics, ArimaModel, ROOT_MARGIN};
pub use forecast::{forecast, max_horizon, Forecast, PredictionInterval, DEFAULT_LEVELS};
pub use simulate::simulate;
pub use spec::{ArimaSpec, MAX_ARMA_TERMS, MAX_TOTAL_DIFFERENCES};
