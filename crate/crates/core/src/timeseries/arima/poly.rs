//! Lag polynomials. AR-type coefficient vectors `a` stand for
//! `1 − a_1 B − … − a_p B^p`; MA-type vectors `b` for `1 + b_1 B + … + b_q B^q`.

use nalgebra::Complex;

/// Full coefficient list `[1, c_1, …]` of `1 + sign·Σ c_i B^{i·step}`.
fn lag_poly(coefs: &[f64], step: usize, sign: f64) -> Vec<f64> {
    let mut p = vec![0.0; coefs.len() * step + 1];
    p[0] = 1.0;
    for (i, c) in coefs.iter().enumerate() {
        p[(i + 1) * step] = sign * c;
    }
    p
}

pub fn multiply(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// AR coefficients of `φ(B)Φ(B^s)` in the `1 − Σ a_i B^i` convention.
pub fn expand_ar(ar: &[f64], sar: &[f64], period: usize) -> Vec<f64> {
    let full = multiply(&lag_poly(ar, 1, -1.0), &lag_poly(sar, period, -1.0));
    full[1..].iter().map(|c| -c).collect()
}

/// MA coefficients of `θ(B)Θ(B^s)` in the `1 + Σ b_i B^i` convention.
pub fn expand_ma(ma: &[f64], sma: &[f64], period: usize) -> Vec<f64> {
    let full = multiply(&lag_poly(ma, 1, 1.0), &lag_poly(sma, period, 1.0));
    full[1..].to_vec()
}

/// Coefficients of `(1 − B)^d (1 − B^s)^D` in the `1 − Σ δ_i B^i` convention.
pub fn differencing(d: usize, seasonal_d: usize, period: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..d {
        p = multiply(&p, &[1.0, -1.0]);
    }
    for _ in 0..seasonal_d {
        p = multiply(&p, &lag_poly(&[1.0], period, -1.0));
    }
    p[1..].iter().map(|c| -c).collect()
}

/// Moduli of the roots of `1 + Σ c_i z^i` (Aberth-Ehrlich iteration).
/// Roots at infinity (from trailing zeros) are dropped; non-finite
/// coefficients report a root at zero.
pub fn root_moduli(c: &[f64]) -> Vec<f64> {
    if c.iter().any(|v| !v.is_finite()) {
        return vec![0.0];
    }
    let deg = c.iter().rposition(|v| *v != 0.0).map_or(0, |i| i + 1);
    if deg == 0 {
        return Vec::new();
    }
    let coef: Vec<f64> = std::iter::once(1.0)
        .chain(c[..deg].iter().copied())
        .collect();
    let eval = |z: Complex<f64>| {
        let mut p = Complex::new(coef[deg], 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for k in (0..deg).rev() {
            dp = dp * z + p;
            p = p * z + coef[k];
        }
        (p, dp)
    };
    // Start on a circle whose radius is the geometric mean of the moduli.
    let radius = (1.0 / coef[deg].abs()).powf(1.0 / deg as f64);
    let mut z: Vec<Complex<f64>> = (0..deg)
        .map(|k| Complex::from_polar(radius, std::f64::consts::TAU * k as f64 / deg as f64 + 0.4))
        .collect();
    for _ in 0..2000 {
        let mut worst: f64 = 0.0;
        for k in 0..deg {
            let (p, dp) = eval(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex<f64> = (0..deg)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                worst = worst.max(step.norm() / z[k].norm().max(1.0));
            }
        }
        if worst < 1e-15 {
            break;
        }
    }
    z.iter().map(|r| r.norm()).collect()
}

/// Exact test that every root of `1 − Σ a_i z^i` has modulus above
/// `radius`, by the Schur-Cohn step-down recursion on the rescaled polynomial.
pub fn ar_roots_outside(a: &[f64], radius: f64) -> bool {
    let scaled: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(i, v)| v * radius.powi(i as i32 + 1))
        .collect();
    let deg = scaled.iter().rposition(|v| *v != 0.0).map_or(0, |i| i + 1);
    ar_to_pacf(&scaled[..deg]).is_some()
}

/// As [`ar_roots_outside`] for `1 + Σ b_i z^i`.
pub fn ma_roots_outside(b: &[f64], radius: f64) -> bool {
    let neg: Vec<f64> = b.iter().map(|v| -v).collect();
    ar_roots_outside(&neg, radius)
}

pub fn min_root_modulus_ar(a: &[f64]) -> f64 {
    let neg: Vec<f64> = a.iter().map(|v| -v).collect();
    root_moduli(&neg).into_iter().fold(f64::INFINITY, f64::min)
}

pub fn min_root_modulus_ma(b: &[f64]) -> f64 {
    root_moduli(b).into_iter().fold(f64::INFINITY, f64::min)
}

/// Maps partial autocorrelations in (−1, 1) to the coefficients of a
/// stationary AR polynomial (Durbin-Levinson recursion).
pub fn pacf_to_ar(r: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(r.len());
    for (k, &rk) in r.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - rk * prev[k - 1 - j];
        }
        phi.push(rk);
    }
    phi
}

/// Inverse of [`pacf_to_ar`]; `None` when the polynomial is not stationary.
pub fn ar_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let mut cur = phi.to_vec();
    let mut r = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let rk = cur[k];
        if !rk.is_finite() || rk.abs() >= 1.0 {
            return None;
        }
        r[k] = rk;
        let denom = 1.0 - rk * rk;
        cur = (0..k)
            .map(|j| (cur[j] + rk * cur[k - 1 - j]) / denom)
            .collect();
    }
    Some(r)
}

/// ψ weights `ψ_0..ψ_{h−1}` of `b(B)/a(B)`.
pub fn psi_weights(a: &[f64], b: &[f64], h: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(h);
    for j in 0..h {
        let mut v = if j == 0 {
            1.0
        } else {
            b.get(j - 1).copied().unwrap_or(0.0)
        };
        for (i, ai) in a.iter().enumerate().take(j) {
            v += ai * psi[j - 1 - i];
        }
        psi.push(v);
    }
    psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn seasonal_expansion() {
        // (1 − 0.5B)(1 − 0.3B^4) = 1 − 0.5B − 0.3B^4 + 0.15B^5
        let a = expand_ar(&[0.5], &[0.3], 4);
        assert_eq!(a, [0.5, 0.0, 0.0, 0.3, -0.15]);
        // (1 + 0.4B)(1 + 0.2B^2) = 1 + 0.4B + 0.2B^2 + 0.08B^3
        let b = expand_ma(&[0.4], &[0.2], 2);
        assert_abs_diff_eq!(b[2], 0.08, epsilon = 1e-15);
        assert_eq!(&b[..2], [0.4, 0.2]);
    }

    #[test]
    fn differencing_operator() {
        assert_eq!(differencing(1, 0, 1), [1.0]);
        assert_eq!(differencing(2, 0, 1), [2.0, -1.0]);
        // (1 − B)(1 − B^4) = 1 − B − B^4 + B^5
        assert_eq!(differencing(1, 1, 4), [1.0, 0.0, 0.0, 1.0, -1.0]);
    }

    #[test]
    fn roots() {
        assert_abs_diff_eq!(min_root_modulus_ar(&[0.5]), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(min_root_modulus_ma(&[-0.25]), 4.0, epsilon = 1e-12);
        // 1 − 0.81B² has roots ±1/0.9
        assert_abs_diff_eq!(
            min_root_modulus_ar(&[0.0, 0.81]),
            1.0 / 0.9,
            epsilon = 1e-12
        );
        assert_eq!(min_root_modulus_ar(&[]), f64::INFINITY);
        assert_abs_diff_eq!(min_root_modulus_ma(&[0.3, 0.0]), 1.0 / 0.3, epsilon = 1e-12);
    }

    #[test]
    fn pacf_round_trip() {
        let r = [0.7, -0.4, 0.2];
        let phi = pacf_to_ar(&r);
        assert!(min_root_modulus_ar(&phi) > 1.0);
        let back = ar_to_pacf(&phi).unwrap();
        for (x, y) in r.iter().zip(&back) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
        assert!(ar_to_pacf(&[1.2]).is_none());
    }

    #[test]
    fn seasonal_roots_on_a_circle() {
        // 1 − 0.5B⁴: four roots of modulus 2^{1/4}.
        let m = root_moduli(&[0.0, 0.0, 0.0, -0.5]);
        assert_eq!(m.len(), 4);
        for r in m {
            assert_abs_diff_eq!(r, 2f64.powf(0.25), epsilon = 1e-12);
        }
        let a = expand_ar(&[0.3], &[0.5], 4);
        assert!(ar_roots_outside(&a, 1.0));
        assert!(ar_roots_outside(&a, 1.18));
        assert!(!ar_roots_outside(&a, 1.19));
        assert!(ma_roots_outside(&[0.5], 1.99) && !ma_roots_outside(&[0.5], 2.01));
    }

    #[test]
    fn psi_of_ar1_and_random_walk() {
        let psi = psi_weights(&[0.5], &[], 4);
        assert_eq!(psi, [1.0, 0.5, 0.25, 0.125]);
        assert_eq!(psi_weights(&[1.0], &[], 3), [1.0, 1.0, 1.0]);
        assert_eq!(psi_weights(&[], &[0.3], 3), [1.0, 0.3, 0.0]);
    }
}
