use serde::{Deserialize, Serialize};

use super::acf::is_effectively_constant;
use super::series::diff_values;
use crate::error::{Error, Result};

/// Level-stationarity critical values (upper tail).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    #[serde(rename = "0.10")]
    pub p10: f64,
    #[serde(rename = "0.05")]
    pub p05: f64,
    #[serde(rename = "0.025")]
    pub p025: f64,
    #[serde(rename = "0.01")]
    pub p01: f64,
}

pub const KPSS_CRITICAL_VALUES: CriticalValues = CriticalValues {
    p10: 0.347,
    p05: 0.463,
    p025: 0.574,
    p01: 0.739,
};

impl CriticalValues {
    pub fn at(&self, alpha: f64) -> Option<f64> {
        [
            (0.10, self.p10),
            (0.05, self.p05),
            (0.025, self.p025),
            (0.01, self.p01),
        ]
        .into_iter()
        .find(|(a, _)| (a - alpha).abs() < 1e-12)
        .map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpssResult {
    pub statistic: f64,
    pub lag_truncation: usize,
    pub critical_values: CriticalValues,
    pub reject_at_5pct: bool,
}

pub const KPSS_MIN_OBS: usize = 8;

/// Default Bartlett truncation `⌊4 (n/100)^{1/4}⌋`.
pub fn kpss_lag(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// KPSS level statistic `η = Σ S_t² / (n² σ̂²)` with a Bartlett-weighted
/// long-run variance at truncation `lag`.
pub fn kpss_statistic(x: &[f64], lag: usize) -> Result<f64> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: n });
    }
    if lag >= n {
        return Err(Error::LagOutOfRange { lag, n });
    }
    if is_effectively_constant(x) {
        return Err(Error::ConstantSeries);
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let e: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let mut s = 0.0;
    let mut eta_num = 0.0;
    for v in &e {
        s += v;
        eta_num += s * s;
    }
    let mut lrv: f64 = e.iter().map(|v| v * v).sum();
    for j in 1..=lag {
        let w = 1.0 - j as f64 / (lag as f64 + 1.0);
        let gamma: f64 = e[j..].iter().zip(&e[..n - j]).map(|(a, b)| a * b).sum();
        lrv += 2.0 * w * gamma;
    }
    lrv /= nf;
    if lrv <= 0.0 {
        return Err(Error::ConstantSeries);
    }
    Ok(eta_num / (nf * nf * lrv))
}

pub fn kpss_test(x: &[f64]) -> Result<KpssResult> {
    if x.len() < KPSS_MIN_OBS {
        return Err(Error::SeriesTooShort {
            needed: KPSS_MIN_OBS,
            got: x.len(),
        });
    }
    let lag = kpss_lag(x.len());
    let statistic = kpss_statistic(x, lag)?;
    Ok(KpssResult {
        statistic,
        lag_truncation: lag,
        critical_values: KPSS_CRITICAL_VALUES,
        reject_at_5pct: statistic > KPSS_CRITICAL_VALUES.p05,
    })
}

/// Number of first differences needed before KPSS stops rejecting level
/// stationarity at `alpha`, capped at `max_d`. A constant series needs none.
pub fn ndiffs(x: &[f64], alpha: f64, max_d: usize) -> Result<usize> {
    let crit = KPSS_CRITICAL_VALUES.at(alpha).ok_or_else(|| {
        Error::InvalidSpec(format!(
            "alpha must be one of 0.10, 0.05, 0.025, 0.01; got {alpha}"
        ))
    })?;
    if x.len() < KPSS_MIN_OBS {
        return Err(Error::SeriesTooShort {
            needed: KPSS_MIN_OBS,
            got: x.len(),
        });
    }
    let mut w = x.to_vec();
    for d in 0..=max_d {
        if is_effectively_constant(&w) {
            return Ok(d);
        }
        let stat = kpss_statistic(&w, kpss_lag(w.len()))?;
        if stat <= crit || d == max_d {
            return Ok(d);
        }
        w = diff_values(&w, 1, 1);
        if w.len() < KPSS_MIN_OBS {
            return Ok(d + 1);
        }
    }
    Ok(max_d)
}

/// Strength of seasonality `max(0, 1 − Var(R)/Var(S + R))` from a classical
/// additive decomposition with a centred moving-average trend.
pub fn seasonal_strength(x: &[f64], period: usize) -> Result<f64> {
    if period < 2 {
        return Ok(0.0);
    }
    let n = x.len();
    if n < 2 * period {
        return Err(Error::SeriesTooShort {
            needed: 2 * period,
            got: n,
        });
    }
    let half = period / 2;
    let mut detrended = vec![f64::NAN; n];
    for t in half..n - half {
        let trend = if period.is_multiple_of(2) {
            if t + half >= n {
                continue;
            }
            let inner: f64 = x[t + 1 - half..t + half].iter().sum();
            (0.5 * x[t - half] + inner + 0.5 * x[t + half]) / period as f64
        } else {
            x[t - half..=t + half].iter().sum::<f64>() / period as f64
        };
        detrended[t] = x[t] - trend;
    }

    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for (t, d) in detrended.iter().enumerate() {
        if d.is_finite() {
            sums[t % period] += d;
            counts[t % period] += 1;
        }
    }
    let raw: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let centre = raw.iter().sum::<f64>() / period as f64;
    let seasonal: Vec<f64> = raw.iter().map(|s| s - centre).collect();

    let (det, rem): (Vec<f64>, Vec<f64>) = detrended
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .map(|(t, d)| (*d, d - seasonal[t % period]))
        .unzip();
    let var_det = variance(&det);
    if var_det <= 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - variance(&rem) / var_det).max(0.0))
}

fn variance(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}
