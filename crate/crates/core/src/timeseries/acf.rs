use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::chi_square_sf;

/// True when the spread of `x` is negligible relative to its magnitude.
/// Used instead of an exact zero-variance test so that affine rescaling of
/// a constant series is still recognised as constant.
pub fn is_effectively_constant(x: &[f64]) -> bool {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let scale = lo.abs().max(hi.abs());
    hi - lo <= 1e-10 * scale
}

/// Sample autocorrelations `ρ_0..=ρ_h` (index = lag, `ρ_0 = 1`).
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: n });
    }
    if max_lag == 0 || max_lag > n - 1 {
        return Err(Error::LagOutOfRange { lag: max_lag, n });
    }
    if is_effectively_constant(x) {
        return Err(Error::ConstantSeries);
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    let mut rho = Vec::with_capacity(max_lag + 1);
    rho.push(1.0);
    for k in 1..=max_lag {
        let num: f64 = dev[k..].iter().zip(&dev[..n - k]).map(|(a, b)| a * b).sum();
        rho.push(num / denom);
    }
    Ok(rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxLag {
    pub lag: usize,
    pub rho: f64,
    pub q: f64,
    pub df: usize,
    /// Absent when `df` is zero.
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxResult {
    pub n: usize,
    pub fitdf: usize,
    pub lags: Vec<LjungBoxLag>,
}

impl LjungBoxResult {
    pub fn last(&self) -> &LjungBoxLag {
        self.lags.last().expect("at least one lag")
    }
}

/// Ljung-Box portmanteau statistics `Q_k = n(n+2) Σ_{j≤k} ρ_j² / (n − j)`
/// for every `k ≤ max_lag`, referred to chi-square with `k − fitdf` df.
pub fn ljung_box(x: &[f64], max_lag: usize, fitdf: usize) -> Result<LjungBoxResult> {
    let rho = acf(x, max_lag)?;
    let n = x.len() as f64;
    let mut acc = 0.0;
    let lags = (1..=max_lag)
        .map(|k| {
            acc += rho[k] * rho[k] / (n - k as f64);
            let q = n * (n + 2.0) * acc;
            let df = k.saturating_sub(fitdf);
            LjungBoxLag {
                lag: k,
                rho: rho[k],
                q,
                df,
                p_value: (df > 0).then(|| chi_square_sf(q, df as f64)),
            }
        })
        .collect();
    Ok(LjungBoxResult {
        n: x.len(),
        fitdf,
        lags,
    })
}
