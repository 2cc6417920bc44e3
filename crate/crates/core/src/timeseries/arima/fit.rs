use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kalman::{self, FilterRun};
use super::optim::NelderMead;
use super::poly::{
    ar_roots_outside, ar_to_pacf, expand_ar, expand_ma, ma_roots_outside, min_root_modulus_ar,
    min_root_modulus_ma, pacf_to_ar,
};
use super::spec::ArimaSpec;
use crate::error::{Error, Result};
use crate::timeseries::acf::{ljung_box, LjungBoxResult};
use crate::timeseries::series::{diff_values, TimeSeries};

/// Roots must clear the unit circle by at least this much.
pub const ROOT_MARGIN: f64 = 1e-6;
const ADMISSIBLE_MODULUS: f64 = 1.0 + 10.0 * ROOT_MARGIN;
const MAX_PACF: f64 = 1.0 - 1e-9;

/// A fitted ARIMA/SARIMA model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub spec: ArimaSpec,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sar: Vec<f64>,
    pub sma: Vec<f64>,
    pub mean: Option<f64>,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
    /// Length of the differenced series the likelihood was computed on.
    pub n_obs: usize,
    pub residuals: Vec<f64>,
    /// Last `d + D·s` observations of the original series.
    pub last_values: Vec<f64>,
    /// Asymptotic standard errors of `ar, ma, sar, sma, mean` in that
    /// order; absent when the observed information is not positive definite.
    pub std_errors: Option<Vec<f64>>,
    pub frequency: u32,
    /// Time of the first forecast step.
    pub next_year: i32,
    pub next_period: u32,
    /// Predicted ARMA state after the last observation.
    pub state: Vec<f64>,
}

impl ArimaModel {
    pub fn full_ar(&self) -> Vec<f64> {
        expand_ar(&self.ar, &self.sar, self.spec.effective_period())
    }

    pub fn full_ma(&self) -> Vec<f64> {
        expand_ma(&self.ma, &self.sma, self.spec.effective_period())
    }

    pub fn min_ar_root(&self) -> f64 {
        min_root_modulus_ar(&self.full_ar())
    }

    pub fn min_ma_root(&self) -> f64 {
        min_root_modulus_ma(&self.full_ma())
    }

    /// Coefficients in the order used by `std_errors`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c = [&self.ar[..], &self.ma, &self.sar, &self.sma].concat();
        c.extend(self.mean);
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Coefs {
    ar: Vec<f64>,
    ma: Vec<f64>,
    sar: Vec<f64>,
    sma: Vec<f64>,
    mean: Option<f64>,
}

impl Coefs {
    fn from_flat(spec: &ArimaSpec, v: &[f64]) -> Self {
        let mut it = v.iter().copied();
        let mut take = |k: usize| it.by_ref().take(k).collect::<Vec<f64>>();
        let ar = take(spec.p);
        let ma = take(spec.q);
        let sar = take(spec.seasonal_p);
        let sma = take(spec.seasonal_q);
        let mean = spec.include_mean.then(|| take(1)[0]);
        Self {
            ar,
            ma,
            sar,
            sma,
            mean,
        }
    }

    fn flat(&self) -> Vec<f64> {
        let mut c = [&self.ar[..], &self.ma, &self.sar, &self.sma].concat();
        c.extend(self.mean);
        c
    }

    fn admissible(&self, period: usize) -> bool {
        ar_roots_outside(&expand_ar(&self.ar, &self.sar, period), ADMISSIBLE_MODULUS)
            && ma_roots_outside(&expand_ma(&self.ma, &self.sma, period), ADMISSIBLE_MODULUS)
    }
}

/// Maps unconstrained values to ARMA coefficients through partial
/// autocorrelations, so every point is stationary and invertible.
struct Transform {
    spec: ArimaSpec,
    centre: f64,
    scale: f64,
}

impl Transform {
    fn dim(&self) -> usize {
        self.spec.n_coefficients() + usize::from(self.spec.include_mean)
    }

    fn ar_block(u: &[f64]) -> Vec<f64> {
        let r: Vec<f64> = u
            .iter()
            .map(|x| x.tanh().clamp(-MAX_PACF, MAX_PACF))
            .collect();
        pacf_to_ar(&r)
    }

    fn ma_block(u: &[f64]) -> Vec<f64> {
        Self::ar_block(u).into_iter().map(|c| -c).collect()
    }

    fn decode(&self, u: &[f64]) -> Coefs {
        let s = &self.spec;
        let (ar, rest) = u.split_at(s.p);
        let (ma, rest) = rest.split_at(s.q);
        let (sar, rest) = rest.split_at(s.seasonal_p);
        let (sma, rest) = rest.split_at(s.seasonal_q);
        Coefs {
            ar: Self::ar_block(ar),
            ma: Self::ma_block(ma),
            sar: Self::ar_block(sar),
            sma: Self::ma_block(sma),
            mean: s.include_mean.then(|| self.centre + self.scale * rest[0]),
        }
    }

    /// Inverse of `decode`; `None` if some block is outside the region.
    fn encode(&self, c: &Coefs) -> Option<Vec<f64>> {
        let ar_u = |a: &[f64]| -> Option<Vec<f64>> {
            Some(
                ar_to_pacf(a)?
                    .into_iter()
                    .map(|r| r.clamp(-MAX_PACF, MAX_PACF).atanh())
                    .collect(),
            )
        };
        let neg = |b: &[f64]| b.iter().map(|v| -v).collect::<Vec<_>>();
        let mut u = ar_u(&c.ar)?;
        u.extend(ar_u(&neg(&c.ma))?);
        u.extend(ar_u(&c.sar)?);
        u.extend(ar_u(&neg(&c.sma))?);
        if let Some(m) = c.mean {
            u.push((m - self.centre) / self.scale);
        }
        Some(u)
    }
}

fn run_filter(w: &[f64], c: &Coefs, period: usize) -> Result<FilterRun> {
    let ar = expand_ar(&c.ar, &c.sar, period);
    let ma = expand_ma(&c.ma, &c.sma, period);
    match c.mean {
        Some(m) => {
            let centred: Vec<f64> = w.iter().map(|v| v - m).collect();
            kalman::filter(&centred, &ar, &ma)
        }
        None => kalman::filter(w, &ar, &ma),
    }
}

fn neg_loglik(w: &[f64], c: &Coefs, period: usize) -> f64 {
    match run_filter(w, c, period) {
        Ok(run) => -run.concentrated_loglik(),
        Err(_) => f64::INFINITY,
    }
}

/// Maximum-likelihood fit of `spec` to `series`.
pub fn fit_arima(series: &TimeSeries, spec: &ArimaSpec) -> Result<ArimaModel> {
    spec.validate(series.frequency(), series.len())?;
    let mut spec = *spec;
    if !spec.is_seasonal() {
        spec.period = 1;
    }
    let period = spec.effective_period();
    let x = series.values();
    let mut w = x.to_vec();
    if spec.d > 0 {
        w = diff_values(&w, 1, spec.d);
    }
    if spec.seasonal_d > 0 {
        w = diff_values(&w, period, spec.seasonal_d);
    }

    let n = w.len() as f64;
    let centre = w.iter().sum::<f64>() / n;
    let sd = (w.iter().map(|v| (v - centre).powi(2)).sum::<f64>() / n).sqrt();
    let transform = Transform {
        spec,
        centre,
        scale: if sd > 0.0 { sd } else { 1.0 },
    };

    let coefs = if spec.n_coefficients() == 0 {
        Coefs {
            ar: vec![],
            ma: vec![],
            sar: vec![],
            sma: vec![],
            mean: spec.include_mean.then_some(centre),
        }
    } else {
        optimise(&w, &transform)?
    };

    let run = run_filter(&w, &coefs, period)?;
    let sigma2 = run.sigma2();
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::NonConvergence);
    }
    let loglik = run.concentrated_loglik();
    let k = spec.n_parameters() as f64;
    let aic = -2.0 * loglik + 2.0 * k;
    let aicc = if n - k - 1.0 > 0.0 {
        aic + 2.0 * k * (k + 1.0) / (n - k - 1.0)
    } else {
        f64::INFINITY
    };
    let bic = -2.0 * loglik + k * n.ln();
    let std_errors = standard_errors(&w, &spec, &coefs);
    let (next_year, next_period) = series.time_at(series.len());

    Ok(ArimaModel {
        spec,
        ar: coefs.ar,
        ma: coefs.ma,
        sar: coefs.sar,
        sma: coefs.sma,
        mean: coefs.mean,
        sigma2,
        loglik,
        aic,
        aicc,
        bic,
        n_obs: w.len(),
        residuals: run.standardized(),
        last_values: x[x.len() - spec.differencing_span()..].to_vec(),
        std_errors,
        frequency: series.frequency(),
        next_year,
        next_period,
        state: run.state,
    })
}

fn optimise(w: &[f64], t: &Transform) -> Result<Coefs> {
    let period = t.spec.effective_period();
    let dim = t.dim();
    let objective = |u: &[f64]| neg_loglik(w, &t.decode(u), period);

    let zeros = vec![0.0; dim];
    let hr = hannan_rissanen(w, &t.spec).and_then(|c| {
        let mut c = c;
        if t.spec.include_mean {
            c.mean = Some(t.centre);
        }
        t.encode(&c)
    });
    let base = hr.clone().unwrap_or_else(|| zeros.clone());
    let perturbed: Vec<f64> = base
        .iter()
        .enumerate()
        .map(|(i, u)| u + if i % 2 == 0 { 0.3 } else { -0.3 })
        .collect();
    let starts: Vec<Vec<f64>> = [Some(zeros), hr, Some(perturbed)]
        .into_iter()
        .flatten()
        .collect();

    let nm = NelderMead::default();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut any_start = false;
    for start in starts {
        if !objective(&start).is_finite() {
            continue;
        }
        any_start = true;
        let mut m = nm.minimize(objective, &start);
        for _ in 0..3 {
            let again = nm.minimize(objective, &m.x);
            let improved = m.value - again.value > 1e-9 * (1.0 + m.value.abs());
            m = if again.value <= m.value { again } else { m };
            if !improved {
                break;
            }
        }
        if m.value.is_finite() && best.as_ref().is_none_or(|(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    if !any_start {
        return Err(Error::NonInvertibleStart);
    }
    let (u, _) = best.ok_or(Error::NonConvergence)?;

    // Points very close to the boundary are pulled inside until the roots
    // clear the unit circle by the required margin.
    let mut u = u;
    let mut coefs = t.decode(&u);
    let mut tries = 0;
    while !coefs.admissible(period) {
        tries += 1;
        if tries > 2000 {
            return Err(Error::NonConvergence);
        }
        for v in u.iter_mut().take(t.spec.n_coefficients()) {
            *v *= 0.99;
        }
        coefs = t.decode(&u);
    }
    Ok(coefs)
}

/// Two-stage regression start: a long autoregression supplies innovation
/// estimates, then the series is regressed on its own lags and lagged
/// innovations (seasonal lags enter additively).
fn hannan_rissanen(w: &[f64], spec: &ArimaSpec) -> Option<Coefs> {
    let s = spec.effective_period();
    let n = w.len();
    let ar_lags: Vec<usize> = (1..=spec.p)
        .chain((1..=spec.seasonal_p).map(|i| i * s))
        .collect();
    let ma_lags: Vec<usize> = (1..=spec.q)
        .chain((1..=spec.seasonal_q).map(|i| i * s))
        .collect();
    let max_lag = ar_lags.iter().chain(&ma_lags).copied().max().unwrap_or(0);
    let long = (max_lag + 2).max(10).min(n / 3);
    if long == 0 {
        return None;
    }
    let mean = w.iter().sum::<f64>() / n as f64;
    let z: Vec<f64> = w.iter().map(|v| v - mean).collect();
    let gamma: Vec<f64> = (0..=long)
        .map(|k| z[k..].iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect();
    let phi = yule_walker(&gamma)?;
    let mut e = vec![0.0; n];
    for t in long..n {
        e[t] = z[t]
            - phi
                .iter()
                .enumerate()
                .map(|(i, p)| p * z[t - 1 - i])
                .sum::<f64>();
    }

    let first = long + max_lag;
    let cols = ar_lags.len() + ma_lags.len();
    if cols == 0 || n < first + cols + 5 {
        return None;
    }
    let rows = n - first;
    let x = DMatrix::from_fn(rows, cols, |r, c| {
        let t = first + r;
        if c < ar_lags.len() {
            z[t - ar_lags[c]]
        } else {
            e[t - ma_lags[c - ar_lags.len()]]
        }
    });
    let y = DVector::from_fn(rows, |r, _| z[first + r]);
    let beta = (x.transpose() * &x).cholesky()?.solve(&(x.transpose() * y));

    let b: Vec<f64> = beta.iter().copied().collect();
    let (ar, rest) = b.split_at(spec.p);
    let (sar, rest) = rest.split_at(spec.seasonal_p);
    let (ma, sma) = rest.split_at(spec.q);
    let coefs = Coefs {
        ar: shrink_into_region(ar, false),
        ma: shrink_into_region(ma, true),
        sar: shrink_into_region(sar, false),
        sma: shrink_into_region(sma, true),
        mean: None,
    };
    coefs.flat().iter().all(|v| v.is_finite()).then_some(coefs)
}

fn yule_walker(gamma: &[f64]) -> Option<Vec<f64>> {
    if gamma[0] <= 0.0 {
        return None;
    }
    let m = gamma.len() - 1;
    let mut phi: Vec<f64> = Vec::new();
    let mut v = gamma[0];
    for k in 1..=m {
        let num = gamma[k]
            - phi
                .iter()
                .enumerate()
                .map(|(j, p)| p * gamma[k - 1 - j])
                .sum::<f64>();
        let r = num / v;
        let prev = phi.clone();
        for j in 0..k - 1 {
            phi[j] = prev[j] - r * prev[k - 2 - j];
        }
        phi.push(r);
        v *= 1.0 - r * r;
        if v <= 0.0 {
            return None;
        }
    }
    Some(phi)
}

fn shrink_into_region(c: &[f64], ma: bool) -> Vec<f64> {
    let ok = |v: &[f64]| {
        if ma {
            ma_roots_outside(v, ADMISSIBLE_MODULUS)
        } else {
            ar_roots_outside(v, ADMISSIBLE_MODULUS)
        }
    };
    let mut v = c.to_vec();
    for _ in 0..50 {
        if ok(&v) {
            return v;
        }
        for (i, x) in v.iter_mut().enumerate() {
            *x *= 0.9f64.powi(i as i32 + 1);
        }
    }
    vec![0.0; c.len()]
}

/// Standard errors from a finite-difference Hessian of the profile
/// log-likelihood in coefficient space.
fn standard_errors(w: &[f64], spec: &ArimaSpec, coefs: &Coefs) -> Option<Vec<f64>> {
    let theta = coefs.flat();
    let k = theta.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let period = spec.effective_period();
    let f = |v: &[f64]| {
        let c = Coefs::from_flat(spec, v);
        run_filter(w, &c, period)
            .map(|r| -r.concentrated_loglik())
            .ok()
    };
    let h: Vec<f64> = theta.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let f0 = f(&theta)?;
    let mut hess = DMatrix::<f64>::zeros(k, k);
    let shifted = |i: usize, si: f64, j: usize, sj: f64| {
        let mut v = theta.clone();
        v[i] += si * h[i];
        v[j] += sj * h[j];
        v
    };
    for i in 0..k {
        let mut up = theta.clone();
        up[i] += h[i];
        let mut down = theta.clone();
        down[i] -= h[i];
        hess[(i, i)] = (f(&up)? - 2.0 * f0 + f(&down)?) / (h[i] * h[i]);
        for j in 0..i {
            let v = (f(&shifted(i, 1.0, j, 1.0))?
                - f(&shifted(i, 1.0, j, -1.0))?
                - f(&shifted(i, -1.0, j, 1.0))?
                + f(&shifted(i, -1.0, j, -1.0))?)
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    let cov = hess.cholesky()?.inverse();
    let se: Vec<f64> = (0..k).map(|i| cov[(i, i)].sqrt()).collect();
    se.iter().all(|v| v.is_finite()).then_some(se)
}

/// Ljung-Box test on a model's residuals with `fitdf = p + q + P + Q`.
pub fn residual_diagnostics(model: &ArimaModel, max_lag: usize) -> Result<LjungBoxResult> {
    ljung_box(&model.residuals, max_lag, model.spec.n_coefficients())
}
