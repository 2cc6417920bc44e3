//! Exact ARMA likelihood through a Kalman filter on the Harvey state-space
//! form: `T` holds the AR coefficients in its first column and ones on the
//! superdiagonal, `R = (1, b_1, …, b_{r−1})ᵀ`, observation `Z = e_1`.

use nalgebra::{DMatrix, DVector};

use super::poly::psi_weights;

use crate::error::{Error, Result};

/// Filter output for unit innovation variance.
#[derive(Debug, Clone)]
pub struct FilterRun {
    /// One-step prediction errors `v_t`.
    pub innovations: Vec<f64>,
    /// Their variances `F_t`, in units of σ².
    pub variances: Vec<f64>,
    /// Predicted state `a_{n+1|n}`.
    pub state: Vec<f64>,
    pub sum_sq: f64,
    pub sum_log_f: f64,
}

impl FilterRun {
    pub fn n(&self) -> usize {
        self.innovations.len()
    }

    /// ML estimate of σ², `Σ v²/F / n`.
    pub fn sigma2(&self) -> f64 {
        self.sum_sq / self.n() as f64
    }

    /// Log-likelihood with σ² profiled out.
    pub fn concentrated_loglik(&self) -> f64 {
        let n = self.n() as f64;
        -0.5 * n * ((2.0 * std::f64::consts::PI * self.sigma2()).ln() + 1.0) - 0.5 * self.sum_log_f
    }

    /// Log-likelihood at a given σ².
    pub fn loglik(&self, sigma2: f64) -> f64 {
        let n = self.n() as f64;
        -0.5 * n * (2.0 * std::f64::consts::PI * sigma2).ln()
            - 0.5 * self.sum_log_f
            - 0.5 * self.sum_sq / sigma2
    }

    /// Standardised innovations `v_t / √F_t`.
    pub fn standardized(&self) -> Vec<f64> {
        self.innovations
            .iter()
            .zip(&self.variances)
            .map(|(v, f)| v / f.sqrt())
            .collect()
    }
}

/// `r = max(p, q + 1)`, with `ar` and `ma` padded to length `r`.
fn system(ar: &[f64], ma: &[f64]) -> (usize, Vec<f64>, Vec<f64>) {
    let r = ar.len().max(ma.len() + 1);
    let mut t = ar.to_vec();
    t.resize(r, 0.0);
    let mut rv = Vec::with_capacity(r);
    rv.push(1.0);
    rv.extend_from_slice(ma);
    rv.resize(r, 0.0);
    (r, t, rv)
}

/// `T M Tᵀ` using the companion structure, O(r²).
#[cfg(test)]
fn sandwich(m: &[f64], phi: &[f64], r: usize, out: &mut [f64]) {
    // x = T M: row i is φ_i·M[0,·] + M[i+1,·].
    let mut x = vec![0.0; r * r];
    for i in 0..r {
        for j in 0..r {
            let mut v = phi[i] * m[j];
            if i + 1 < r {
                v += m[(i + 1) * r + j];
            }
            x[i * r + j] = v;
        }
    }
    // out = x Tᵀ: column j is φ_j·x[·,0] + x[·,j+1].
    for i in 0..r {
        for j in 0..r {
            let mut v = phi[j] * x[i * r];
            if j + 1 < r {
                v += x[i * r + j + 1];
            }
            out[i * r + j] = v;
        }
    }
}

/// Autocovariances `γ(0..=m)` of the unit-variance ARMA process with AR
/// coefficients `phi` and MA polynomial `rv` (leading 1 included).
fn autocovariances(phi: &[f64], rv: &[f64], m: usize) -> Result<Vec<f64>> {
    let p = phi.iter().rposition(|v| *v != 0.0).map_or(0, |i| i + 1);
    let psi = psi_weights(&phi[..p], &rv[1..], rv.len());
    // Cross term E[y_t ε_{t−k}]-weighted sums: Σ_{j≥k} θ_j ψ_{j−k}.
    let rhs = |k: usize| (k..rv.len()).map(|j| rv[j] * psi[j - k]).sum::<f64>();

    let mut a = DMatrix::<f64>::identity(p + 1, p + 1);
    for k in 0..=p {
        for i in 1..=p {
            a[(k, k.abs_diff(i))] -= phi[i - 1];
        }
    }
    let b = DVector::from_fn(p + 1, |k, _| rhs(k));
    let head = a.lu().solve(&b).ok_or(Error::NonConvergence)?;
    let mut gamma: Vec<f64> = head.iter().copied().collect();
    for k in p + 1..=m {
        let v = (1..=p).map(|i| phi[i - 1] * gamma[k - i]).sum::<f64>() + rhs(k);
        gamma.push(v);
    }
    gamma.truncate(m + 1);
    Ok(gamma)
}

/// Stationary state covariance solving `P = T P Tᵀ + R Rᵀ`. With
/// `α_t(i) = Σ_{k≥i} φ_k y_{t−1−k+i} + R_k ε_{t−k+i}` the first row is
/// `Cov(y_t, α_t(j)) = Σ_{k≥j} φ_k γ(k−j+1) + R_k ψ_{k−j}`; the rest follows
/// from the equation read entrywise, starting at the bottom-right corner.
fn initial_covariance(phi: &[f64], rv: &[f64], r: usize) -> Result<Vec<f64>> {
    let gamma = autocovariances(phi, rv, r)?;
    if !(gamma[0].is_finite() && gamma[0] > 0.0 && gamma[0] < 1e12) {
        return Err(Error::NonConvergence);
    }
    let psi = psi_weights(phi, &rv[1..], r);
    let mut p = vec![0.0; r * r];
    p[0] = gamma[0];
    for j in 1..r {
        let v = (j..r)
            .map(|k| phi[k] * gamma[k - j + 1] + rv[k] * psi[k - j])
            .sum::<f64>();
        p[j] = v;
        p[j * r] = v;
    }
    let at = |p: &[f64], i: usize, j: usize| if i < r && j < r { p[i * r + j] } else { 0.0 };
    for i in (1..r).rev() {
        for j in (i..r).rev() {
            let v = phi[i] * phi[j] * p[0]
                + phi[i] * at(&p, 0, j + 1)
                + phi[j] * at(&p, i + 1, 0)
                + at(&p, i + 1, j + 1)
                + rv[i] * rv[j];
            p[i * r + j] = v;
            p[j * r + i] = v;
        }
    }
    Ok(p)
}

/// Runs the filter on a zero-mean series `w` with σ² = 1.
pub fn filter(w: &[f64], ar: &[f64], ma: &[f64]) -> Result<FilterRun> {
    let (r, phi, rv) = system(ar, ma);
    // Covariances live in (r+1)×(r+1) buffers whose last row and column stay
    // zero, so the shifted reads in the update need no bounds tests.
    let n = r + 1;
    let p0 = initial_covariance(&phi, &rv, r)?;
    let mut p = vec![0.0; n * n];
    for i in 0..r {
        p[i * n..i * n + r].copy_from_slice(&p0[i * r..(i + 1) * r]);
    }
    let mut pn = vec![0.0; n * n];
    let mut a = vec![0.0; r];
    let mut innovations = Vec::with_capacity(w.len());
    let mut variances = Vec::with_capacity(w.len());
    let mut sum_sq = 0.0;
    let mut sum_log_f = 0.0;
    let mut steady = false;
    let mut gain = vec![0.0; n];
    let mut f = 0.0;

    for &y in w {
        if !steady {
            f = p[0];
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::NonConvergence);
            }
            for i in 0..r {
                gain[i] = p[i * n] / f;
            }
        }
        let v = y - a[0];
        innovations.push(v);
        variances.push(f);
        sum_sq += v * v / f;
        sum_log_f += f.ln();

        // a ← T (a + K v)
        for i in 0..r {
            a[i] += gain[i] * v;
        }
        let a0 = a[0];
        for i in 0..r {
            a[i] = phi[i] * a0 + if i + 1 < r { a[i + 1] } else { 0.0 };
        }

        if !steady {
            // P ← T (P − P e₁ e₁ᵀ P / F) Tᵀ + R Rᵀ. The update zeroes the
            // first row and column, which removes every term involving φ.
            let mut delta: f64 = 0.0;
            for i in 0..r {
                let (g, r_i) = (gain[i + 1], rv[i]);
                let top = &p[1..=r];
                let next = &p[(i + 1) * n + 1..(i + 1) * n + 1 + r];
                let old = &p[i * n..i * n + r];
                let out = &mut pn[i * n..i * n + r];
                for j in 0..r {
                    let val = next[j] - g * top[j] + r_i * rv[j];
                    delta = delta.max((val - old[j]).abs());
                    out[j] = val;
                }
            }
            std::mem::swap(&mut p, &mut pn);
            steady = delta < 1e-14;
        }
    }
    Ok(FilterRun {
        innovations,
        variances,
        state: a,
        sum_sq,
        sum_log_f,
    })
}

/// Exact Gaussian log-likelihood of a zero-mean ARMA series.
pub fn arma_loglik(w: &[f64], ar: &[f64], ma: &[f64], sigma2: f64) -> Result<f64> {
    Ok(filter(w, ar, ma)?.loglik(sigma2))
}
