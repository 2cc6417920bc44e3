#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn normals(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Autocovariances of a zero-mean ARMA(1,1) with unit innovation variance.
pub fn arma11_acvf(phi: f64, theta: f64, n: usize) -> Vec<f64> {
    let mut g = vec![0.0; n];
    g[0] = (1.0 + 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi);
    if n > 1 {
        g[1] = (1.0 + phi * theta) * (phi + theta) / (1.0 - phi * phi);
    }
    for k in 2..n {
        g[k] = phi * g[k - 1];
    }
    g
}

/// Log-density of `x` under N(0, σ²Γ) with Γ the Toeplitz matrix of `acvf`,
/// by dense Cholesky factorisation.
pub fn dense_gaussian_loglik(x: &[f64], acvf: &[f64], sigma2: f64) -> f64 {
    let n = x.len();
    let cov = nalgebra::DMatrix::from_fn(n, n, |i, j| sigma2 * acvf[i.abs_diff(j)]);
    let chol = cov.cholesky().expect("positive definite");
    let l = chol.l();
    let z = l
        .solve_lower_triangular(&nalgebra::DVector::from_column_slice(x))
        .unwrap();
    let log_det: f64 = (0..n).map(|i| l[(i, i)].ln()).sum::<f64>() * 2.0;
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + z.norm_squared())
}

/// Yule-Walker AR(1) estimate, `ρ̂_1`.
pub fn yule_walker_ar1(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let num: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    let den: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    num / den
}
