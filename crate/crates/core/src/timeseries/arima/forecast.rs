use serde::{Deserialize, Serialize};

use super::fit::ArimaModel;
use super::poly::{differencing, multiply, psi_weights};
use crate::error::{Error, Result};
use crate::special::normal_quantile;
use crate::timeseries::series::format_time;

pub const DEFAULT_LEVELS: [f64; 2] = [0.80, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub level: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub horizon: usize,
    pub times: Vec<String>,
    pub point: Vec<f64>,
    /// Forecast standard errors per step.
    pub se: Vec<f64>,
    pub intervals: Vec<PredictionInterval>,
}

impl Forecast {
    pub fn interval(&self, level: f64) -> Option<&PredictionInterval> {
        self.intervals
            .iter()
            .find(|i| (i.level - level).abs() < 1e-12)
    }
}

/// Largest horizon the service and CLI accept for a series of this frequency.
pub fn max_horizon(frequency: u32) -> usize {
    5 * frequency as usize
}

/// `h`-step forecasts with prediction intervals at each of `levels`.
pub fn forecast(model: &ArimaModel, horizon: usize, levels: &[f64]) -> Result<Forecast> {
    if horizon == 0 {
        return Err(Error::HorizonOutOfRange(horizon));
    }
    if let Some(&bad) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::InvalidLevel(bad));
    }
    let period = model.spec.effective_period();
    let ar = model.full_ar();
    let ma = model.full_ma();
    let mean = model.mean.unwrap_or(0.0);

    // ARMA part: propagate the filtered state with zero future shocks.
    let r = model.state.len();
    let mut phi = ar.clone();
    phi.resize(r, 0.0);
    let mut state = model.state.clone();
    let mut w = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        w.push(state[0] + mean);
        let a0 = state[0];
        for i in 0..r {
            state[i] = phi[i] * a0 + if i + 1 < r { state[i + 1] } else { 0.0 };
        }
    }

    // Undo differencing: x_t = w_t + Σ δ_i x_{t−i}.
    let delta = differencing(model.spec.d, model.spec.seasonal_d, period);
    let mut history = model.last_values.clone();
    let mut point = Vec::with_capacity(horizon);
    for wt in w {
        let t = history.len();
        let x = wt
            + delta
                .iter()
                .enumerate()
                .map(|(i, d)| d * history[t - 1 - i])
                .sum::<f64>();
        history.push(x);
        point.push(x);
    }

    // ψ weights of the integrated model φ(B)Φ(B^s)(1−B)^d(1−B^s)^D.
    let ar_poly: Vec<f64> = std::iter::once(1.0).chain(ar.iter().map(|a| -a)).collect();
    let delta_poly: Vec<f64> = std::iter::once(1.0)
        .chain(delta.iter().map(|a| -a))
        .collect();
    let full: Vec<f64> = multiply(&ar_poly, &delta_poly)[1..]
        .iter()
        .map(|c| -c)
        .collect();
    let psi = psi_weights(&full, &ma, horizon);
    let mut acc = 0.0;
    let se: Vec<f64> = psi
        .iter()
        .map(|p| {
            acc += p * p;
            (model.sigma2 * acc).sqrt()
        })
        .collect();

    let intervals = levels
        .iter()
        .map(|&level| {
            let z = normal_quantile(0.5 + level / 2.0);
            PredictionInterval {
                level,
                lower: point.iter().zip(&se).map(|(p, s)| p - z * s).collect(),
                upper: point.iter().zip(&se).map(|(p, s)| p + z * s).collect(),
            }
        })
        .collect();

    let start = model.next_year as i64 * model.frequency as i64 + model.next_period as i64 - 1;
    let f = model.frequency as i64;
    let times = (0..horizon as i64)
        .map(|i| {
            let idx = start + i;
            format_time(
                idx.div_euclid(f) as i32,
                (idx.rem_euclid(f) + 1) as u32,
                model.frequency,
            )
        })
        .collect();

    Ok(Forecast {
        horizon,
        times,
        point,
        se,
        intervals,
    })
}
