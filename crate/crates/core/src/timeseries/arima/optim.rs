/// Outcome of a Nelder-Mead minimisation.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

pub struct NelderMead {
    pub step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            step: 0.1,
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_evaluations: 20_000,
        }
    }
}

impl NelderMead {
    /// Minimises `f` from `x0`. Non-finite values are treated as +∞.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let evals = std::cell::Cell::new(0usize);
        let mut eval = |x: &[f64]| {
            evals.set(evals.get() + 1);
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                f64::INFINITY
            }
        };
        if n == 0 {
            let value = eval(x0);
            return Minimum {
                x: Vec::new(),
                value,
                evaluations: 1,
                converged: true,
            };
        }

        let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.step;
            simplex.push(x);
        }
        let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();
        let mut converged = false;

        loop {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let f_spread = values[n] - values[0];
            let x_spread = simplex[1..]
                .iter()
                .flat_map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if values[0].is_finite()
                && f_spread <= self.f_tol * (1.0 + values[0].abs())
                && x_spread <= self.x_tol
            {
                converged = true;
                break;
            }
            if evals.get() >= self.max_evaluations {
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64)
                .collect();
            let toward = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[n])
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let xr = toward(-1.0);
            let fr = eval(&xr);
            if fr < values[0] {
                let xe = toward(-2.0);
                let fe = eval(&xe);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            // Outside contraction if the reflection helped at all, else inside.
            let xc = toward(if fr < values[n] { -0.5 } else { 0.5 });
            let fc = eval(&xc);
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            let best = simplex[0].clone();
            for i in 1..=n {
                simplex[i] = best
                    .iter()
                    .zip(&simplex[i])
                    .map(|(b, x)| b + 0.5 * (x - b))
                    .collect();
                values[i] = eval(&simplex[i]);
            }
        }
        Minimum {
            x: simplex.swap_remove(0),
            value: values[0],
            evaluations: evals.get(),
            converged,
        }
    }
}
