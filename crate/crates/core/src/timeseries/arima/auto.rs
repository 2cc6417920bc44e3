use std::collections::HashMap;

use super::fit::{fit_arima, ArimaModel};
use super::spec::{ArimaSpec, MAX_ARMA_TERMS};
use crate::error::{Error, Result};
use crate::timeseries::kpss::{ndiffs, seasonal_strength};
use crate::timeseries::series::{diff_values, TimeSeries};

pub const AUTO_MIN_OBS: usize = 20;
pub const SEASONAL_STRENGTH_THRESHOLD: f64 = 0.64;
const MAX_P: usize = 5;
const MAX_Q: usize = 5;
const MAX_SP: usize = 2;
const MAX_SQ: usize = 2;

/// Differencing orders and whether seasonal terms are searched at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AutoDifferencing {
    pub d: usize,
    pub seasonal_d: usize,
    pub seasonal: bool,
}

/// `D` from the seasonal-strength rule, then `d` from KPSS on the
/// (seasonally differenced) series.
pub fn choose_differencing(series: &TimeSeries) -> Result<AutoDifferencing> {
    let n = series.len();
    if n < AUTO_MIN_OBS {
        return Err(Error::TooFewObservations {
            needed: AUTO_MIN_OBS,
            got: n,
        });
    }
    let s = series.frequency() as usize;
    let seasonal = s > 1 && n >= 2 * s + 8;
    let seasonal_d =
        if seasonal && seasonal_strength(series.values(), s)? > SEASONAL_STRENGTH_THRESHOLD {
            1
        } else {
            0
        };
    let base = if seasonal_d == 1 {
        diff_values(series.values(), s, 1)
    } else {
        series.values().to_vec()
    };
    let d = ndiffs(&base, 0.05, 2)?;
    Ok(AutoDifferencing {
        d,
        seasonal_d,
        seasonal,
    })
}

/// Stepwise AICc search over `(p, q, P, Q)`.
pub fn auto_fit(series: &TimeSeries) -> Result<ArimaModel> {
    let AutoDifferencing {
        d,
        seasonal_d,
        seasonal,
    } = choose_differencing(series)?;
    let s = if seasonal {
        series.frequency() as usize
    } else {
        1
    };
    let include_mean = d + seasonal_d == 0;

    let make = |(p, q, sp, sq): (usize, usize, usize, usize)| {
        let mut spec = ArimaSpec::new(p, d, q).with_mean(include_mean);
        if seasonal {
            spec = spec.seasonal(sp, seasonal_d, sq, s);
        }
        spec
    };
    let allowed = |(p, q, sp, sq): (usize, usize, usize, usize)| {
        p <= MAX_P
            && q <= MAX_Q
            && sp <= MAX_SP
            && sq <= MAX_SQ
            && p + q + sp + sq <= MAX_ARMA_TERMS
            && (seasonal || sp + sq == 0)
    };

    let mut fits: HashMap<(usize, usize, usize, usize), Option<ArimaModel>> = HashMap::new();
    let mut last_error = None;
    let mut evaluate = |key, fits: &mut HashMap<_, Option<ArimaModel>>| -> Option<f64> {
        if let Some(m) = fits.get(&key) {
            return m.as_ref().map(|m: &ArimaModel| m.aicc);
        }
        let result = fit_arima(series, &make(key));
        let model = match result {
            Ok(m) if m.aicc.is_finite() => Some(m),
            Ok(_) => None,
            Err(e) => {
                last_error = Some(e);
                None
            }
        };
        let aicc = model.as_ref().map(|m| m.aicc);
        fits.insert(key, model);
        aicc
    };

    let seasonal_starts: &[(usize, usize)] = if seasonal {
        &[(0, 0), (1, 0), (0, 1)]
    } else {
        &[(0, 0)]
    };
    let mut best: Option<((usize, usize, usize, usize), f64)> = None;
    for &(p, q) in &[(0, 0), (1, 0), (0, 1), (2, 2)] {
        for &(sp, sq) in seasonal_starts {
            let key = (p, q, sp, sq);
            if !allowed(key) {
                continue;
            }
            if let Some(a) = evaluate(key, &mut fits) {
                if best.is_none_or(|(_, b)| a < b) {
                    best = Some((key, a));
                }
            }
        }
    }

    while let Some((key, aicc)) = best {
        let (p, q, sp, sq) = key;
        let mut moves = Vec::new();
        for (dp, dq, dsp, dsq) in [
            (1, 0, 0, 0),
            (-1, 0, 0, 0),
            (0, 1, 0, 0),
            (0, -1, 0, 0),
            (0, 0, 1, 0),
            (0, 0, -1, 0),
            (0, 0, 0, 1),
            (0, 0, 0, -1),
        ] {
            let step = |v: usize, dv: i32| v.checked_add_signed(dv as isize);
            if let (Some(a), Some(b), Some(c), Some(e)) =
                (step(p, dp), step(q, dq), step(sp, dsp), step(sq, dsq))
            {
                if allowed((a, b, c, e)) {
                    moves.push((a, b, c, e));
                }
            }
        }
        let mut improved = None;
        for m in moves {
            if let Some(a) = evaluate(m, &mut fits) {
                if a < improved.map_or(aicc, |(_, b)| b) {
                    improved = Some((m, a));
                }
            }
        }
        match improved {
            Some(next) => best = Some(next),
            None => break,
        }
    }

    match best {
        Some((key, _)) => Ok(fits.remove(&key).flatten().expect("best model was fitted")),
        None => Err(match last_error {
            Some(Error::TooFewObservations { needed, got }) => {
                Error::TooFewObservations { needed, got }
            }
            _ => Error::NonConvergence,
        }),
    }
}
