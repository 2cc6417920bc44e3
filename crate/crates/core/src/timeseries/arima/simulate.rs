use super::poly::{expand_ar, expand_ma};
use super::spec::ArimaSpec;

/// Generates a series from `spec` with the given coefficients, driven by
/// caller-supplied innovations. The first `burn_in` ARMA values are
/// discarded; the integrated series starts from zeros.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    spec: &ArimaSpec,
    ar: &[f64],
    ma: &[f64],
    sar: &[f64],
    sma: &[f64],
    mean: f64,
    innovations: &[f64],
    burn_in: usize,
) -> Vec<f64> {
    let period = spec.effective_period();
    let a = expand_ar(ar, sar, period);
    let b = expand_ma(ma, sma, period);
    let mut w: Vec<f64> = Vec::with_capacity(innovations.len());
    for t in 0..innovations.len() {
        let mut v = innovations[t];
        for (i, ai) in a.iter().enumerate() {
            if t > i {
                v += ai * w[t - 1 - i];
            }
        }
        for (j, bj) in b.iter().enumerate() {
            if t > j {
                v += bj * innovations[t - 1 - j];
            }
        }
        w.push(v);
    }
    let mut x: Vec<f64> = w[burn_in.min(w.len())..].iter().map(|v| v + mean).collect();
    let integrate = |x: &[f64], lag: usize| -> Vec<f64> {
        let mut out: Vec<f64> = Vec::with_capacity(x.len());
        for t in 0..x.len() {
            out.push(x[t] + if t >= lag { out[t - lag] } else { 0.0 });
        }
        out
    };
    for _ in 0..spec.d {
        x = integrate(&x, 1);
    }
    for _ in 0..spec.seasonal_d {
        x = integrate(&x, period);
    }
    x
}
