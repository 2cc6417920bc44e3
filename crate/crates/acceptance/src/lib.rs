//! Fixtures, brute-force oracles and a small pass/fail reporter used by the
//! acceptance suite.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use datadesk_core::table::{Column, Table, Value};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn normals(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn cells<T>(rng: &mut StdRng, rows: usize, draw: impl Fn(&mut StdRng) -> T) -> Vec<Option<T>> {
    (0..rows)
        .map(|_| {
            let v = draw(rng);
            (!rng.random_bool(0.1)).then_some(v)
        })
        .collect()
}

/// A table of 1..=50 rows and 1..=8 columns of random dtypes, each cell
/// missing with probability 0.1.
pub fn random_table(rng: &mut StdRng) -> Table {
    let rows = rng.random_range(1..=50);
    let cols = rng.random_range(1..=8);
    let epoch = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
    let words = ["north", "south", "east", "west", "x"];
    let columns = (0..cols)
        .map(|c| {
            let name = format!("c{c}");
            match rng.random_range(0..5) {
                0 => Column::integer(name, cells(rng, rows, |r| r.random_range(-20..20))),
                1 => Column::real(
                    name,
                    cells(rng, rows, |r| r.random_range(-4000..4000) as f64 / 16.0),
                ),
                2 => Column::boolean(name, cells(rng, rows, |r| r.random_bool(0.5))),
                3 => Column::text(
                    name,
                    cells(rng, rows, |r| words[r.random_range(0..words.len())]),
                ),
                _ => Column::date(
                    name,
                    cells(rng, rows, |r| {
                        epoch + chrono::Duration::days(r.random_range(0..60))
                    }),
                ),
            }
        })
        .collect();
    Table::new("t", columns).unwrap()
}

/// Type-7 quantile straight from the definition.
pub fn quantile_oracle(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Rendered cell, used as a group or level key.
pub fn key(v: Option<Value>) -> Option<String> {
    v.map(|v| v.render())
}

/// `ρ_k = Σ_{t>k} (x_t − x̄)(x_{t−k} − x̄) / Σ (x_t − x̄)²`.
pub fn acf_oracle(x: &[f64], k: usize) -> f64 {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let mut num = 0.0;
    for t in k..n {
        num += (x[t] - m) * (x[t - k] - m);
    }
    let mut den = 0.0;
    for v in x {
        den += (v - m) * (v - m);
    }
    num / den
}

pub fn ljung_box_oracle(x: &[f64], h: usize) -> f64 {
    let n = x.len() as f64;
    let mut s = 0.0;
    for k in 1..=h {
        s += acf_oracle(x, k).powi(2) / (n - k as f64);
    }
    n * (n + 2.0) * s
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

/// Log-density of `x` under N(0, σ²Γ), Γ the Toeplitz matrix of `acvf`.
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

/// Quarterly marketing campaign results: spend and clicks per channel and
/// region, with a few blank cells.
pub fn campaign_csv(seed: u64) -> String {
    let mut r = rng(seed);
    let channels = ["search", "social", "email", "display"];
    let regions = ["north", "south", "east", "west"];
    let mut out = String::from("year,quarter,channel,region,spend,clicks,converted\n");
    for year in 2019..2023 {
        for quarter in 1..=4 {
            for channel in channels {
                let region = regions[r.random_range(0..regions.len())];
                let spend = r.random_range(500.0..5000.0f64);
                let clicks = (spend * r.random_range(0.5..3.0)) as i64;
                let converted = r.random_bool(0.4);
                let blank = r.random_range(0..20);
                let cell = |i: usize, s: String| if blank == i { String::new() } else { s };
                out.push_str(&format!(
                    "{year},Q{quarter},{channel},{},{},{},{}\n",
                    cell(0, region.to_owned()),
                    cell(1, format!("{spend:.2}")),
                    cell(2, clicks.to_string()),
                    cell(3, converted.to_string()),
                ));
            }
        }
    }
    out
}

/// Monthly sales with trend, yearly seasonality and Gaussian noise.
pub fn monthly_csv(seed: u64, n: usize) -> String {
    let mut r = rng(seed);
    let noise = normals(&mut r, n);
    let mut out = String::from("year,month,sales\n");
    for (i, e) in noise.iter().enumerate() {
        let t = i as f64;
        let v = 200.0 + 1.5 * t + 25.0 * (2.0 * std::f64::consts::PI * t / 12.0).sin() + 6.0 * e;
        out.push_str(&format!("{},{},{:.2}\n", 2015 + i / 12, i % 12 + 1, v));
    }
    out
}

/// Collects one pass/fail line per criterion.
#[derive(Default)]
pub struct Report {
    failures: Vec<String>,
    total: usize,
}

impl Report {
    /// Runs `check` and prints its outcome. The check passes when it returns
    /// `Ok` within `budget`; panics count as failures.
    pub fn run(
        &mut self,
        name: &str,
        budget: Duration,
        check: impl FnOnce() -> Result<String, String>,
    ) {
        self.total += 1;
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > budget => Err(format!(
                "took {:.1}s, budget {}s",
                elapsed.as_secs_f64(),
                budget.as_secs()
            )),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({:.1}s)", elapsed.as_secs_f64()),
            Err(detail) => {
                println!("FAIL {name}: {detail} ({:.1}s)", elapsed.as_secs_f64());
                self.failures.push(name.to_owned());
            }
        }
    }

    pub fn finish(self) -> ! {
        println!(
            "\n{} of {} criteria passed",
            self.total - self.failures.len(),
            self.total
        );
        std::process::exit(if self.failures.is_empty() { 0 } else { 1 });
    }
}

/// Turns a failed condition into the check's error message.
#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}
