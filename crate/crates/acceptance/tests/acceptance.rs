//! Acceptance criteria for the engine and the HTTP service. Each criterion
//! prints one PASS or FAIL line; the process exits non-zero if any fails.
//!
//! Fixed seeds:
//!
//! | criterion            | seeds                                         |
//! |----------------------|-----------------------------------------------|
//! | data engine          | tables 1000..1200                             |
//! | acf / ljung-box      | series 2000..2200, white noise 3000..4000     |
//! | kpss / ndiffs        | trend 5000.., white noise 6000.., walk 7000.. |
//! | likelihood           | 11                                            |
//! | estimator recovery   | AR 2024, MA 77, seasonal 5                    |
//! | forecast invariants  | walk 3, mixed 99, plus the recovery seeds     |
//! | inverse/composition  | 8000..8200                                    |
//! | service              | campaign 42, monthly 43                       |

use std::future::IntoFuture;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use datadesk_acceptance::*;
use datadesk_core::charts::{histogram, xy_series, ChartData, XyKind};
use datadesk_core::ops::{
    filter_rows, group_aggregate, select_columns, summarize_column, value_counts, AggFn,
    AggregationSpec, Comparator, Measure, Predicate,
};
use datadesk_core::table::{parse_csv, schema, ColumnData, ParseOptions, Table, Value};
use datadesk_core::timeseries::arima::{self, kalman, ArimaModel, ArimaSpec};
use datadesk_core::timeseries::series::diff_values;
use datadesk_core::timeseries::{
    acf, auto_fit, build_series, difference, fit_arima, forecast, integrate, kpss_statistic,
    kpss_test, ljung_box, ndiffs, SeriesSpec, TimeSeries,
};
use datadesk_service::analysis::{all_rows, rows_page, FitResponse};
use datadesk_service::{router, Store};
use http_body_util::BodyExt;
use rand::rngs::StdRng;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value as Json};
use tower::ServiceExt;

fn main() {
    let mut report = Report::default();
    report.run("data engine", Duration::from_secs(30), data_engine);
    report.run("acf and ljung-box", Duration::from_secs(60), acf_ljung_box);
    report.run("kpss and ndiffs", Duration::from_secs(60), kpss_ndiffs);
    report.run("kalman likelihood", Duration::from_secs(60), likelihood);
    report.run("estimator recovery", Duration::from_secs(120), recovery);
    report.run(
        "forecast invariants",
        Duration::from_secs(120),
        forecast_invariants,
    );
    report.run(
        "inverse and composition",
        Duration::from_secs(60),
        inverse_composition,
    );
    report.run("service", Duration::from_secs(120), service);
    report.finish();
}

// ---------------------------------------------------------------- data engine

const COMPARATORS: [Comparator; 6] = [
    Comparator::Eq,
    Comparator::Ne,
    Comparator::Lt,
    Comparator::Le,
    Comparator::Gt,
    Comparator::Ge,
];

fn holds(op: Comparator, ord: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        Comparator::Eq => ord == Equal,
        Comparator::Ne => ord != Equal,
        Comparator::Lt => ord == Less,
        Comparator::Le => ord != Greater,
        Comparator::Gt => ord == Greater,
        _ => ord != Less,
    }
}

/// A random leaf predicate on column `c` and the row set a scan selects.
fn leaf(t: &Table, c: usize, r: &mut StdRng) -> (Predicate, Vec<bool>) {
    let col = &t.columns()[c];
    let name = col.name().to_owned();
    if r.random_bool(0.2) {
        let missing: Vec<bool> = (0..t.n_rows()).map(|i| col.get(i).is_none()).collect();
        return if r.random_bool(0.5) {
            (Predicate::is_missing(name), missing)
        } else {
            (
                Predicate::not_missing(name),
                missing.iter().map(|m| !m).collect(),
            )
        };
    }
    let op = COMPARATORS[r.random_range(0..COMPARATORS.len())];
    match col.data() {
        ColumnData::Integer(_) | ColumnData::Real(_) => {
            let th = r.random_range(-25..25) as f64 / 2.0;
            let xs = col.as_f64().unwrap();
            let rows = xs
                .iter()
                .map(|x| x.is_some_and(|x| holds(op, x.partial_cmp(&th).unwrap())))
                .collect();
            (Predicate::compare(name, op, th), rows)
        }
        ColumnData::Date(cells) => {
            let d = chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap()
                + chrono::Duration::days(r.random_range(0..60));
            let rows = cells
                .iter()
                .map(|x| x.is_some_and(|x| holds(op, x.cmp(&d))))
                .collect();
            (Predicate::compare(name, op, Value::Date(d)), rows)
        }
        ColumnData::Boolean(cells) => {
            let (op, b) = (
                [Comparator::Eq, Comparator::Ne][r.random_range(0..2)],
                r.random_bool(0.5),
            );
            let rows = cells
                .iter()
                .map(|x| x.is_some_and(|x| holds(op, x.cmp(&b))))
                .collect();
            (Predicate::compare(name, op, b), rows)
        }
        ColumnData::Text(cells) => {
            if r.random_bool(0.3) {
                let rows = cells
                    .iter()
                    .map(|x| x.as_ref().is_some_and(|x| x.contains('o')))
                    .collect();
                return (Predicate::compare(name, Comparator::Contains, "o"), rows);
            }
            let op = [Comparator::Eq, Comparator::Ne][r.random_range(0..2)];
            let w = ["north", "east", "x", "none"][r.random_range(0..4)];
            let rows = cells
                .iter()
                .map(|x| x.as_ref().is_some_and(|x| holds(op, x.as_str().cmp(w))))
                .collect();
            (Predicate::compare(name, op, w), rows)
        }
    }
}

fn rows_where(mask: &[bool]) -> Vec<usize> {
    (0..mask.len()).filter(|&i| mask[i]).collect()
}

fn check_table(t: &Table, r: &mut StdRng) -> Result<(), String> {
    let n = t.n_rows();
    let k = t.n_columns();

    for _ in 0..4 {
        let (p, a) = leaf(t, r.random_range(0..k), r);
        let (q, b) = leaf(t, r.random_range(0..k), r);
        let both: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x && *y).collect();
        let either: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x || *y).collect();
        let not: Vec<bool> = a.iter().map(|x| !x).collect();
        for (pred, mask) in [
            (p.clone(), a.clone()),
            (
                Predicate::And {
                    and: vec![p.clone(), q.clone()],
                },
                both,
            ),
            (
                Predicate::Or {
                    or: vec![p.clone(), q],
                },
                either,
            ),
            (p.negate(), not),
        ] {
            let got = filter_rows(t, &pred).map_err(|e| format!("filter {pred:?}: {e}"))?;
            ensure!(
                got == t.take_rows(&rows_where(&mask)),
                "filter {pred:?} differs from scan"
            );
        }
    }

    let mut names: Vec<String> = t.column_names().map(str::to_owned).collect();
    for i in (1..names.len()).rev() {
        names.swap(i, r.random_range(0..=i));
    }
    names.truncate(r.random_range(0..=k));
    let sel = select_columns(t, &names).map_err(|e| format!("select: {e}"))?;
    ensure!(
        sel.n_rows() == n && sel.n_columns() == names.len(),
        "select shape"
    );
    for (col, name) in sel.columns().iter().zip(&names) {
        ensure!(col == t.column(name).unwrap(), "select column {name}");
    }

    let n_keys = r.random_range(1..=k.min(2));
    let keys: Vec<String> = t.column_names().take(n_keys).map(str::to_owned).collect();
    let measures: Vec<Measure> = t
        .columns()
        .iter()
        .skip(n_keys)
        .flat_map(|c| {
            let fns: Vec<AggFn> = if c.dtype().is_numeric() {
                AggFn::ALL.to_vec()
            } else {
                vec![AggFn::Count]
            };
            fns.into_iter().map(|f| Measure::new(c.name(), f))
        })
        .collect();
    let spec = AggregationSpec {
        group_keys: keys.clone(),
        measures: measures.clone(),
    };
    let out = group_aggregate(t, &spec).map_err(|e| format!("aggregate: {e}"))?;
    let mut levels: Vec<Vec<Option<String>>> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for row in 0..n {
        let kv: Vec<Option<String>> = keys
            .iter()
            .map(|c| key(t.column(c).unwrap().get(row)))
            .collect();
        match levels.iter().position(|l| *l == kv) {
            Some(g) => members[g].push(row),
            None => {
                levels.push(kv);
                members.push(vec![row]);
            }
        }
    }
    ensure!(
        out.n_rows() == levels.len(),
        "group count {} vs {}",
        out.n_rows(),
        levels.len()
    );
    for (g, level) in levels.iter().enumerate() {
        let got: Vec<Option<String>> = keys
            .iter()
            .map(|c| key(out.column(c).unwrap().get(g)))
            .collect();
        ensure!(got == *level, "group {g} key");
    }
    for m in &measures {
        let col = t.column(&m.column).unwrap();
        let got = out.column(&m.output_name()).unwrap().as_f64().unwrap();
        for (g, rows) in members.iter().enumerate() {
            let expected = if m.function == AggFn::Count {
                Some(rows.iter().filter(|&&i| col.get(i).is_some()).count() as f64)
            } else {
                let xs: Vec<f64> = rows
                    .iter()
                    .filter_map(|&i| col.get(i).and_then(|v| v.as_f64()))
                    .collect();
                let len = xs.len() as f64;
                let mut sum = 0.0;
                for x in &xs {
                    sum += x;
                }
                let mean = sum / len;
                match m.function {
                    AggFn::Sum => Some(sum),
                    _ if xs.is_empty() => None,
                    AggFn::Mean => Some(mean),
                    AggFn::Min => xs.iter().copied().reduce(f64::min),
                    AggFn::Max => xs.iter().copied().reduce(f64::max),
                    AggFn::Median => Some(quantile_oracle(&xs, 0.5)),
                    AggFn::Sd if xs.len() < 2 => None,
                    _ => Some(
                        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (len - 1.0))
                            .sqrt(),
                    ),
                }
            };
            ensure!(
                got[g] == expected,
                "{} group {g}: {:?} vs {expected:?}",
                m.output_name(),
                got[g]
            );
        }
    }

    for col in t.columns() {
        let vc = value_counts(t, col.name()).map_err(|e| format!("value_counts: {e}"))?;
        let mut counts: Vec<(String, usize)> = Vec::new();
        for row in 0..n {
            if let Some(level) = key(col.get(row)) {
                match counts.iter_mut().find(|(l, _)| *l == level) {
                    Some((_, c)) => *c += 1,
                    None => counts.push((level, 1)),
                }
            }
        }
        counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let got: Vec<(String, usize)> = vc
            .entries
            .iter()
            .map(|e| (e.level.clone(), e.count))
            .collect();
        ensure!(got == counts, "value_counts {}", col.name());

        if col.dtype().is_numeric() {
            let xs: Vec<f64> = col.as_f64().unwrap().into_iter().flatten().collect();
            let s = match summarize_column(t, col.name()) {
                Ok(s) => s,
                Err(_) if xs.is_empty() => continue,
                Err(e) => return Err(format!("summary {}: {e}", col.name())),
            };
            ensure!(
                s.n == n && s.n_missing == n - xs.len(),
                "summary counts {}",
                col.name()
            );
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let mut pairs = vec![
                (s.min, quantile_oracle(&xs, 0.0)),
                (s.q1, quantile_oracle(&xs, 0.25)),
                (s.median, quantile_oracle(&xs, 0.5)),
                (s.q3, quantile_oracle(&xs, 0.75)),
                (s.max, quantile_oracle(&xs, 1.0)),
                (s.mean, mean),
            ];
            if xs.len() > 1 {
                let var =
                    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
                pairs.push((s.sd.ok_or("missing sd")?, var.sqrt()));
            }
            for (a, b) in pairs {
                ensure!((a - b).abs() <= 1e-12, "summary {}: {a} vs {b}", col.name());
            }
        }
    }
    Ok(())
}

fn data_engine() -> Result<String, String> {
    let mut cells = 0;
    for seed in 1000..1200 {
        let mut r = rng(seed);
        let t = random_table(&mut r);
        cells += t.n_rows() * t.n_columns();
        check_table(&t, &mut r).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    Ok(format!("200 tables, {cells} cells"))
}

// ------------------------------------------------------------ time series

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn acf_ljung_box() -> Result<String, String> {
    for seed in 2000..2200 {
        let mut r = rng(seed);
        let n = r.random_range(10..300);
        let scale = r.random_range(0.1..100.0);
        let x: Vec<f64> = normals(&mut r, n).iter().map(|v| 5.0 + scale * v).collect();
        let h = (n - 1).min(20);
        let rho = acf(&x, h).map_err(|e| e.to_string())?;
        let lb = ljung_box(&x, h, 0).map_err(|e| e.to_string())?;
        for (k, (r, lag)) in rho
            .iter()
            .skip(1)
            .zip(&lb.lags)
            .enumerate()
            .map(|(i, v)| (i + 1, v))
        {
            ensure!(
                (r - acf_oracle(&x, k)).abs() <= 1e-12,
                "seed {seed}: rho_{k}"
            );
            ensure!(
                close(lag.q, ljung_box_oracle(&x, k), 1e-12),
                "seed {seed}: Q_{k}"
            );
        }
    }

    let hand = ljung_box(&[1.0, 2.0, 3.0, 4.0], 1, 0).map_err(|e| e.to_string())?;
    ensure!(
        (hand.lags[0].rho - 0.25).abs() <= 1e-12,
        "rho_1 = {}",
        hand.lags[0].rho
    );
    ensure!(
        (hand.lags[0].q - 0.5).abs() <= 1e-12,
        "Q_1 = {}",
        hand.lags[0].q
    );

    let mut rejected = 0;
    for seed in 3000..4000 {
        let x = normals(&mut rng(seed), 200);
        let p = ljung_box(&x, 10, 0)
            .map_err(|e| e.to_string())?
            .last()
            .p_value
            .unwrap();
        rejected += usize::from(p < 0.05);
    }
    let rate = rejected as f64 / 1000.0;
    ensure!(
        (0.03..=0.07).contains(&rate),
        "white-noise rejection rate {rate}"
    );
    Ok(format!(
        "200 oracle series, hand case exact, white-noise rejection {:.1}%",
        rate * 100.0
    ))
}

fn kpss_ndiffs() -> Result<String, String> {
    let eta = kpss_statistic(&[1.0, 2.0, 3.0, 4.0], 0).map_err(|e| e.to_string())?;
    ensure!((eta - 0.425).abs() <= 1e-12, "eta = {eta}");

    let share = |seeds: std::ops::Range<u64>,
                 n: usize,
                 make: fn(Vec<f64>) -> Vec<f64>,
                 test: &dyn Fn(&[f64]) -> bool| {
        let hits = seeds
            .clone()
            .filter(|&s| test(&make(normals(&mut rng(s), n))))
            .count();
        hits as f64 / (seeds.end - seeds.start) as f64
    };
    let trend: fn(Vec<f64>) -> Vec<f64> = |e| {
        e.iter()
            .enumerate()
            .map(|(t, v)| 10.0 + 0.1 * t as f64 + v)
            .collect()
    };
    let noise: fn(Vec<f64>) -> Vec<f64> = |e| e;
    let walk: fn(Vec<f64>) -> Vec<f64> = |e| {
        e.iter()
            .scan(0.0, |s, v| {
                *s += v;
                Some(*s)
            })
            .collect()
    };
    let nd = |x: &[f64]| ndiffs(x, 0.05, 2).unwrap();

    let rejects = share(5000..5200, 200, trend, &|x| {
        kpss_test(x).unwrap().reject_at_5pct
    });
    let trend_one = share(5000..5200, 200, trend, &|x| nd(x) == 1);
    let noise_zero = share(6000..6200, 200, noise, &|x| nd(x) == 0);
    let walk_one = share(7000..7200, 300, walk, &|x| nd(x) == 1);
    let detail = format!(
        "trend rejected {:.1}%, ndiffs(trend)=1 {:.1}%, ndiffs(wn)=0 {:.1}%, ndiffs(rw)=1 {:.1}%",
        rejects * 100.0,
        trend_one * 100.0,
        noise_zero * 100.0,
        walk_one * 100.0
    );
    ensure!(
        rejects >= 0.95 && trend_one >= 0.95 && noise_zero >= 0.90 && walk_one >= 0.90,
        "{detail}"
    );
    Ok(format!("eta exact, {detail}"))
}

fn likelihood() -> Result<String, String> {
    let mut r = rng(11);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let phi: f64 = r.random_range(-0.95..0.95);
        let theta: f64 = r.random_range(-0.95..0.95);
        let sigma2: f64 = r.random_range(0.2..3.0);
        let n = r.random_range(2..=30);
        let e: Vec<f64> = normals(&mut r, n + 50)
            .iter()
            .map(|v| v * sigma2.sqrt())
            .collect();
        let x = arima::simulate(
            &ArimaSpec::new(1, 0, 1),
            &[phi],
            &[theta],
            &[],
            &[],
            0.0,
            &e,
            50,
        );
        let kal = kalman::arma_loglik(&x, &[phi], &[theta], sigma2).map_err(|e| e.to_string())?;
        let dense = dense_gaussian_loglik(&x, &arma11_acvf(phi, theta, n), sigma2);
        worst = worst.max((kal - dense).abs());
    }
    ensure!(worst <= 1e-6, "max |kalman - dense| = {worst:e}");
    Ok(format!("50 draws, max |difference| {worst:.1e}"))
}

fn series(values: Vec<f64>, frequency: u32) -> TimeSeries {
    TimeSeries::new(values, 2000, 1, frequency).unwrap()
}

fn ar1_fixture() -> (Vec<f64>, ArimaModel) {
    let e = normals(&mut rng(2024), 700);
    let spec = ArimaSpec::new(1, 0, 0).with_mean(true);
    let x = arima::simulate(&spec, &[0.7], &[], &[], &[], 5.0, &e, 200);
    let m = fit_arima(&series(x.clone(), 1), &spec).unwrap();
    (x, m)
}

fn ma1_fixture() -> ArimaModel {
    let e = normals(&mut rng(77), 600);
    let spec = ArimaSpec::new(0, 0, 1);
    let x = arima::simulate(&spec, &[], &[0.5], &[], &[], 0.0, &e, 100);
    fit_arima(&series(x, 1), &spec).unwrap()
}

fn airline_fixture() -> ArimaModel {
    let e = normals(&mut rng(5), 300);
    let spec = ArimaSpec::new(0, 1, 1).seasonal(0, 1, 1, 12);
    let x = arima::simulate(&spec, &[], &[-0.4], &[], &[-0.6], 0.0, &e, 60);
    fit_arima(&series(x, 12), &spec).unwrap()
}

fn recovery() -> Result<String, String> {
    let (x, ar) = ar1_fixture();
    ensure!(x.len() == 500, "AR series length {}", x.len());
    let ma = ma1_fixture();
    let sarima = airline_fixture();
    ensure!(sarima.n_obs + 13 == 240, "seasonal series length");
    let (phi, theta, t1, t12) = (ar.ar[0], ma.ma[0], sarima.ma[0], sarima.sma[0]);
    let detail = format!("phi {phi:.3}, theta {theta:.3}, seasonal theta {t1:.3} / {t12:.3}");
    ensure!(
        (phi - 0.7).abs() <= 0.1
            && (theta - 0.5).abs() <= 0.12
            && (t1 + 0.4).abs() <= 0.15
            && (t12 + 0.6).abs() <= 0.15,
        "{detail}"
    );
    Ok(detail)
}

fn check_nesting(m: &ArimaModel) -> Result<(), String> {
    let f = forecast(m, 24, &[0.80, 0.95]).map_err(|e| e.to_string())?;
    let (i80, i95) = (f.interval(0.80).unwrap(), f.interval(0.95).unwrap());
    for i in 0..f.horizon {
        ensure!(
            i95.lower[i] <= i80.lower[i]
                && i80.lower[i] <= f.point[i]
                && f.point[i] <= i80.upper[i]
                && i80.upper[i] <= i95.upper[i],
            "{}: intervals not nested at step {}",
            m.spec,
            i + 1
        );
    }
    ensure!(
        f.se.windows(2).all(|w| w[1] >= w[0]),
        "{}: standard errors decrease",
        m.spec
    );
    for iv in [i80, i95] {
        let widths: Vec<f64> = iv.upper.iter().zip(&iv.lower).map(|(u, l)| u - l).collect();
        ensure!(
            widths.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)),
            "{}: widths decrease",
            m.spec
        );
    }
    Ok(())
}

fn forecast_invariants() -> Result<String, String> {
    let mut x = vec![10.0];
    for e in normals(&mut rng(3), 99) {
        x.push(x.last().unwrap() + e);
    }
    let rw =
        fit_arima(&series(x.clone(), 12), &ArimaSpec::new(0, 1, 0)).map_err(|e| e.to_string())?;
    let f = forecast(&rw, 12, &[0.95]).map_err(|e| e.to_string())?;
    let last = *x.last().unwrap();
    ensure!(
        f.point.iter().all(|p| *p == last),
        "random-walk points differ from the last value"
    );
    let i95 = f.interval(0.95).unwrap();
    for h in 1..=12 {
        let half = i95.upper[h - 1] - f.point[h - 1];
        let expected = 1.9599639845 * (rw.sigma2 * h as f64).sqrt();
        ensure!(
            (half - expected).abs() <= 1e-8 * expected,
            "half-width at h={h}: {half} vs {expected}"
        );
    }

    let (xa, ar) = ar1_fixture();
    let f = forecast(&ar, 10, &[0.95]).map_err(|e| e.to_string())?;
    let (mu, phi, xn) = (ar.mean.unwrap(), ar.ar[0], *xa.last().unwrap());
    for (i, p) in f.point.iter().enumerate() {
        let expected = mu + phi.powi(i as i32 + 1) * (xn - mu);
        ensure!(
            (p - expected).abs() <= 1e-8 * expected.abs().max(1.0),
            "AR(1) step {}: {p} vs {expected}",
            i + 1
        );
    }

    let e = normals(&mut rng(99), 400);
    let mixed = arima::simulate(
        &ArimaSpec::new(2, 1, 1),
        &[0.5, -0.3],
        &[0.4],
        &[],
        &[],
        0.0,
        &e,
        100,
    );
    let mut models = vec![rw, ar, ma1_fixture(), airline_fixture()];
    for spec in [
        ArimaSpec::new(2, 1, 1),
        ArimaSpec::new(1, 1, 2),
        ArimaSpec::new(0, 2, 2),
        ArimaSpec::new(3, 0, 0).with_mean(true),
        ArimaSpec::new(1, 1, 0).seasonal(1, 0, 1, 4),
    ] {
        models
            .push(fit_arima(&series(mixed.clone(), 4), &spec).map_err(|e| format!("{spec}: {e}"))?);
    }
    let monthly = parse(&monthly_csv(43, 72));
    models.push(
        auto_fit(&build_series(&monthly, &monthly_spec()).unwrap()).map_err(|e| e.to_string())?,
    );
    for m in &models {
        check_nesting(m)?;
    }
    Ok(format!(
        "random walk and AR(1) closed forms exact, {} models nested and monotone",
        models.len()
    ))
}

fn inverse_composition() -> Result<String, String> {
    for seed in 8000..8200 {
        let mut r = rng(seed);
        let n = r.random_range(30..120);
        let x: Vec<f64> = normals(&mut r, n).iter().map(|v| 50.0 * v).collect();
        let lag = r.random_range(1..=12);
        let order = r.random_range(1..=2);
        let back = integrate(&diff_values(&x, lag, order), lag, order, &x[..lag * order]);
        ensure!(back.len() == n, "seed {seed}: integrated length");
        for (a, b) in back.iter().zip(&x) {
            ensure!(
                (a - b).abs() <= 1e-10 * b.abs().max(1.0),
                "seed {seed}: integrate {a} vs {b}"
            );
        }

        let s = series(x.clone(), 12);
        let twice = difference(&difference(&s, lag, 1).unwrap(), lag, 1).unwrap();
        let once = difference(&s, lag, 2).unwrap();
        ensure!(
            twice == once,
            "seed {seed}: order-2 differs from repeated order-1"
        );

        let a = [-7.5, -0.01, 0.02, 3.0, 40.0][r.random_range(0..5)];
        let b = r.random_range(-1e3..1e3);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let (qx, qy) = (ljung_box(&x, 10, 0).unwrap(), ljung_box(&y, 10, 0).unwrap());
        for (u, v) in qx.lags.iter().zip(&qy.lags) {
            ensure!(
                close(v.q, u.q, 1e-9),
                "seed {seed}: Q_{} {} vs {}",
                u.lag,
                u.q,
                v.q
            );
        }
        ensure!(
            ndiffs(&x, 0.05, 2) == ndiffs(&y, 0.05, 2),
            "seed {seed}: ndiffs not affine invariant"
        );
    }
    Ok("200 series".into())
}

// ----------------------------------------------------------------- service

fn parse(csv: &str) -> Table {
    parse_csv(csv.as_bytes(), &ParseOptions::default()).unwrap()
}

fn monthly_spec() -> SeriesSpec {
    serde_json::from_value(monthly_spec_json()).unwrap()
}

fn monthly_spec_json() -> Json {
    json!({"value_col": "sales", "time": {"year_col": "year", "period_col": "month"}})
}

fn to_json<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).unwrap()
}

fn with(base: Json, extra: Json) -> Json {
    let mut body = base;
    body.as_object_mut()
        .unwrap()
        .extend(extra.as_object().unwrap().clone());
    body
}

struct Client(Router);

impl Client {
    async fn send(&self, req: Request<Body>) -> (StatusCode, Vec<u8>) {
        let resp = self.0.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        (
            status,
            resp.into_body()
                .collect()
                .await
                .unwrap()
                .to_bytes()
                .to_vec(),
        )
    }

    async fn get(&self, path: &str) -> (StatusCode, Json) {
        let (s, b) = self
            .send(Request::get(path).body(Body::empty()).unwrap())
            .await;
        (s, serde_json::from_slice(&b).unwrap())
    }

    async fn post_raw(&self, path: &str, content_type: &str, body: Vec<u8>) -> (StatusCode, Json) {
        let req = Request::builder()
            .method(Method::POST)
            .uri(path)
            .header(header::CONTENT_TYPE, content_type)
            .body(Body::from(body))
            .unwrap();
        let (s, b) = self.send(req).await;
        (s, serde_json::from_slice(&b).unwrap())
    }

    async fn post(&self, path: &str, body: &Json) -> (StatusCode, Json) {
        self.post_raw(path, "application/json", body.to_string().into_bytes())
            .await
    }

    async fn upload(&self, name: &str, csv: &str) -> Result<String, String> {
        let (s, record) = self
            .post_raw(
                &format!("/api/datasets?name={name}"),
                "text/csv",
                csv.as_bytes().to_vec(),
            )
            .await;
        ensure!(s == StatusCode::CREATED, "upload {name}: {s} {record}");
        Ok(record["id"].as_str().unwrap().to_owned())
    }
}

/// Compares one endpoint's answer with the value computed in-process.
macro_rules! expect_ok {
    ($count:ident, $call:expr, $expected:expr, $what:expr) => {{
        let (status, body) = $call;
        ensure!(
            status == StatusCode::OK,
            "{}: status {status} {body}",
            $what
        );
        ensure!(
            body == $expected,
            "{}: body differs from the core result",
            $what
        );
        $count += 1;
    }};
}

async fn service_checks() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let open = || Store::open(dir.path(), datadesk_service::DEFAULT_MAX_UPLOAD_BYTES).map(Arc::new);
    let app = Client(router(open().map_err(|e| e.to_string())?));
    let mut checked = 0;

    let campaign_text = campaign_csv(42);
    let monthly_text = monthly_csv(43, 72);
    let campaign = parse(&campaign_text);
    let monthly = parse(&monthly_text);
    let cid = app.upload("campaign.csv", &campaign_text).await?;
    let mid = app.upload("sales.csv", &monthly_text).await?;
    let c = |op: &str| format!("/api/datasets/{cid}/{op}");
    let m = |op: &str| format!("/api/datasets/{mid}/{op}");

    expect_ok!(
        checked,
        app.get("/healthz").await,
        json!({"status": "ok"}),
        "healthz"
    );
    let (_, listed) = app.get("/api/datasets").await;
    ensure!(listed.as_array().map(Vec::len) == Some(2), "list: {listed}");
    checked += 1;
    let (_, record) = app.get(&format!("/api/datasets/{cid}")).await;
    ensure!(
        record["schema"] == to_json(&schema(&campaign)),
        "record schema"
    );
    checked += 1;
    let (s, raw) = app
        .send(
            Request::get(format!("/api/datasets/{cid}/raw"))
                .body(Body::empty())
                .unwrap(),
        )
        .await;
    ensure!(
        s == StatusCode::OK && raw == campaign_text.as_bytes(),
        "raw bytes"
    );
    checked += 1;
    expect_ok!(
        checked,
        app.get(&c("schema")).await,
        to_json(&schema(&campaign)),
        "schema"
    );
    expect_ok!(
        checked,
        app.get(&c("rows?offset=5&limit=7")).await,
        to_json(&rows_page(&campaign, 5, 7)),
        "rows"
    );

    for column in ["spend", "clicks", "channel", "converted", "region"] {
        let req = json!({"column": column});
        let summary = summarize_column(&campaign, column);
        match summary {
            Ok(s) => expect_ok!(
                checked,
                app.post(&c("summary"), &req).await,
                to_json(&s),
                "summary"
            ),
            Err(e) => {
                let (status, body) = app.post(&c("summary"), &req).await;
                ensure!(
                    status == StatusCode::UNPROCESSABLE_ENTITY && body["code"] == e.code(),
                    "summary error {column}"
                );
                checked += 1;
            }
        }
        expect_ok!(
            checked,
            app.post(&c("value_counts"), &req).await,
            to_json(&value_counts(&campaign, column).unwrap()),
            "value_counts"
        );
    }
    let charts = [
        (
            json!({"kind": "histogram", "columns": ["spend"], "bins": 6}),
            ChartData::Histogram(histogram(&campaign, "spend", Some(6)).unwrap()),
        ),
        (
            json!({"kind": "histogram", "columns": ["clicks"]}),
            ChartData::Histogram(histogram(&campaign, "clicks", None).unwrap()),
        ),
        (
            json!({"kind": "bar", "columns": ["channel"]}),
            ChartData::Bar(value_counts(&campaign, "channel").unwrap()),
        ),
        (
            json!({"kind": "scatter", "columns": ["spend", "clicks"]}),
            ChartData::Xy(xy_series(&campaign, "spend", "clicks", XyKind::Scatter).unwrap()),
        ),
        (
            json!({"kind": "line", "columns": ["spend", "clicks"]}),
            ChartData::Xy(xy_series(&campaign, "spend", "clicks", XyKind::Line).unwrap()),
        ),
    ];
    for (req, expected) in charts {
        expect_ok!(
            checked,
            app.post(&c("chart"), &req).await,
            to_json(&expected),
            "chart"
        );
    }

    let predicate = json!({"and": [{"column": "spend", "op": ">", "value": 2000}, {"not": {"column": "channel", "op": "==", "value": "email"}}]});
    let p: Predicate = serde_json::from_value(predicate.clone()).unwrap();
    let filtered = filter_rows(&campaign, &p).unwrap();
    expect_ok!(
        checked,
        app.post(&c("filter"), &json!({"predicate": predicate}))
            .await,
        to_json(&all_rows(&filtered)),
        "filter"
    );
    let selected = select_columns(&campaign, &["channel", "spend"]).unwrap();
    expect_ok!(
        checked,
        app.post(&c("select"), &json!({"columns": ["channel", "spend"]}))
            .await,
        to_json(&all_rows(&selected)),
        "select"
    );
    let agg = json!({"group_keys": ["channel"], "measures": [
        {"column": "spend", "function": "sum"}, {"column": "spend", "function": "median"},
        {"column": "clicks", "function": "mean"}, {"column": "converted", "function": "count"}
    ]});
    let spec: AggregationSpec = serde_json::from_value(agg.clone()).unwrap();
    expect_ok!(
        checked,
        app.post(&c("aggregate"), &agg).await,
        to_json(&all_rows(&group_aggregate(&campaign, &spec).unwrap())),
        "aggregate"
    );
    let (s, derived) = app
        .post(
            &c("filter"),
            &json!({"predicate": predicate, "materialize": true}),
        )
        .await;
    ensure!(s == StatusCode::CREATED, "materialize: {s} {derived}");
    let did = derived["id"].as_str().unwrap().to_owned();
    checked += 1;

    let ts = build_series(&monthly, &monthly_spec()).unwrap();
    let (s, body) = app.post(&m("series"), &monthly_spec_json()).await;
    ensure!(
        s == StatusCode::OK && body["plot"] == to_json(&ts.plot_data(false)) && body["n"] == 72,
        "series"
    );
    checked += 1;
    expect_ok!(
        checked,
        app.post(
            &m("ljung_box"),
            &with(monthly_spec_json(), json!({"max_lag": 12}))
        )
        .await,
        to_json(&ljung_box(ts.values(), 12, 0).unwrap()),
        "ljung_box"
    );
    let (s, body) = app.post(&m("ndiffs"), &monthly_spec_json()).await;
    ensure!(
        s == StatusCode::OK
            && body["ndiffs"] == ndiffs(ts.values(), 0.05, 2).unwrap()
            && body["kpss"] == to_json(&kpss_test(ts.values()).unwrap()),
        "ndiffs"
    );
    checked += 1;
    expect_ok!(
        checked,
        app.post(&m("diff"), &with(monthly_spec_json(), json!({"lag": 12})))
            .await,
        to_json(&difference(&ts, 12, 1).unwrap().plot_data(true)),
        "diff"
    );
    let airline = ArimaSpec::new(0, 1, 1).seasonal(0, 1, 1, 12);
    let model = fit_arima(&ts, &airline).unwrap();
    let expected = FitResponse {
        label: airline.to_string(),
        model: model.clone(),
    };
    expect_ok!(
        checked,
        app.post(
            &m("fit"),
            &with(monthly_spec_json(), json!({"spec": airline}))
        )
        .await,
        to_json(&expected),
        "fit"
    );
    expect_ok!(
        checked,
        app.post(
            &m("forecast"),
            &with(
                monthly_spec_json(),
                json!({"spec": airline, "horizon": 12, "levels": [0.8, 0.95]})
            )
        )
        .await,
        to_json(&forecast(&model, 12, &[0.8, 0.95]).unwrap()),
        "forecast"
    );
    let auto = auto_fit(&ts).unwrap();
    let (s, body) = app.post(&m("fit"), &monthly_spec_json()).await;
    ensure!(
        s == StatusCode::OK && body["model"] == to_json(&auto),
        "auto fit"
    );
    checked += 1;

    let (s, body) = app.get("/api/datasets/nope/schema").await;
    ensure!(
        s == StatusCode::NOT_FOUND && body["code"] == "unknown_dataset",
        "unknown dataset: {s} {body}"
    );
    let (s, body) = app
        .post(
            &m("forecast"),
            &with(monthly_spec_json(), json!({"horizon": 61})),
        )
        .await;
    ensure!(
        s == StatusCode::UNPROCESSABLE_ENTITY && body["code"] == "horizon_out_of_range",
        "horizon: {s} {body}"
    );
    checked += 2;

    // A new process over the same directory sees the same datasets.
    drop(app);
    let app = Client(router(open().map_err(|e| e.to_string())?));
    let (_, after) = app.get("/api/datasets").await;
    ensure!(
        after.as_array().map(Vec::len) == Some(3),
        "after restart: {after}"
    );
    let (_, raw) = app
        .send(
            Request::get(format!("/api/datasets/{mid}/raw"))
                .body(Body::empty())
                .unwrap(),
        )
        .await;
    ensure!(raw == monthly_text.as_bytes(), "raw bytes after restart");
    expect_ok!(
        checked,
        app.get(&format!("/api/datasets/{did}/rows?limit=1000"))
            .await,
        to_json(&all_rows(&filtered)),
        "derived rows after restart"
    );
    expect_ok!(
        checked,
        app.get(&c("schema")).await,
        to_json(&schema(&campaign)),
        "schema after restart"
    );

    // Served over a real socket with nothing but the API router.
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0")
        .await
        .map_err(|e| e.to_string())?;
    let addr = listener.local_addr().unwrap();
    let server = tokio::spawn(axum::serve(listener, app.0.clone()).into_future());
    let reply = raw_get(addr, "/healthz").await?;
    server.abort();
    ensure!(
        reply.starts_with("HTTP/1.1 200") && reply.contains("\"ok\""),
        "socket healthz: {reply}"
    );
    checked += 1;

    Ok(format!(
        "{checked} endpoint checks, restart and socket serving ok"
    ))
}

async fn raw_get(addr: std::net::SocketAddr, path: &str) -> Result<String, String> {
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    let mut stream = tokio::net::TcpStream::connect(addr)
        .await
        .map_err(|e| e.to_string())?;
    let req = format!("GET {path} HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n");
    stream
        .write_all(req.as_bytes())
        .await
        .map_err(|e| e.to_string())?;
    let mut out = String::new();
    stream
        .read_to_string(&mut out)
        .await
        .map_err(|e| e.to_string())?;
    Ok(out)
}

fn service() -> Result<String, String> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?
        .block_on(service_checks())
}
