use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::charts::SeriesPlotData;
use crate::error::{Error, Result};
use crate::stats;
use crate::table::{ColumnData, Table};

pub const SUPPORTED_FREQUENCIES: [u32; 3] = [1, 4, 12];

/// Equally spaced observations starting at `(start_year, start_period)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    start_year: i32,
    start_period: u32,
    frequency: u32,
}

impl TimeSeries {
    pub fn new(
        values: Vec<f64>,
        start_year: i32,
        start_period: u32,
        frequency: u32,
    ) -> Result<Self> {
        if !SUPPORTED_FREQUENCIES.contains(&frequency) {
            return Err(Error::UnsupportedFrequency(frequency));
        }
        if start_period < 1 || start_period > frequency {
            return Err(Error::InvalidTimeIndex(format!(
                "start period {start_period} outside 1..={frequency}"
            )));
        }
        if values.is_empty() {
            return Err(Error::SeriesTooShort { needed: 1, got: 0 });
        }
        let series = Self {
            values,
            start_year,
            start_period,
            frequency,
        };
        if let Some(i) = series.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::MissingValueInSeries(series.label(i)));
        }
        Ok(series)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start_year(&self) -> i32 {
        self.start_year
    }

    pub fn start_period(&self) -> u32 {
        self.start_period
    }

    pub fn frequency(&self) -> u32 {
        self.frequency
    }

    fn start_index(&self) -> i64 {
        period_index(self.start_year, self.start_period, self.frequency)
    }

    /// `(year, period)` of observation `i` (may lie past the end).
    pub fn time_at(&self, i: usize) -> (i32, u32) {
        split_index(self.start_index() + i as i64, self.frequency)
    }

    pub fn label(&self, i: usize) -> String {
        let (y, p) = self.time_at(i);
        format_time(y, p, self.frequency)
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }

    /// Labels for the `h` periods after the last observation.
    pub fn future_labels(&self, h: usize) -> Vec<String> {
        (self.len()..self.len() + h)
            .map(|i| self.label(i))
            .collect()
    }

    pub fn mean(&self) -> f64 {
        stats::mean(&self.values).expect("non-empty")
    }

    /// Plot payload; `with_mean` adds a horizontal line at the series mean.
    pub fn plot_data(&self, with_mean: bool) -> SeriesPlotData {
        SeriesPlotData {
            times: self.labels(),
            values: self.values.clone(),
            reference_line: with_mean.then(|| self.mean()),
        }
    }
}

fn period_index(year: i32, period: u32, frequency: u32) -> i64 {
    year as i64 * frequency as i64 + (period as i64 - 1)
}

fn split_index(index: i64, frequency: u32) -> (i32, u32) {
    let f = frequency as i64;
    (index.div_euclid(f) as i32, (index.rem_euclid(f) + 1) as u32)
}

pub fn format_time(year: i32, period: u32, frequency: u32) -> String {
    match frequency {
        12 => format!("{year:04}-{period:02}"),
        4 => format!("{year:04} Q{period}"),
        1 => format!("{year:04}"),
        f => format!("{year:04}/{period}of{f}"),
    }
}

/// Where the time axis of a series comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    /// A date column; monthly, quarterly or annual spacing is inferred.
    DateColumn {
        date_col: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frequency: Option<u32>,
    },
    /// Year plus month or quarter columns.
    YearPeriod {
        year_col: String,
        period_col: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frequency: Option<u32>,
    },
    /// Annual data keyed by year.
    Year { year_col: String },
    /// Rows are already in time order.
    Regular {
        start_year: i32,
        start_period: u32,
        frequency: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub value_col: String,
    pub time: TimeSpec,
}

/// Builds a [`TimeSeries`] from a table, ordering rows by time and
/// rejecting gaps, duplicate timestamps and missing values.
pub fn build_series(table: &Table, spec: &SeriesSpec) -> Result<TimeSeries> {
    let value_col = table.column(&spec.value_col)?;
    let values = value_col
        .as_f64()
        .ok_or_else(|| Error::NonNumericColumn(spec.value_col.clone()))?;
    if table.n_rows() == 0 {
        return Err(Error::SeriesTooShort { needed: 1, got: 0 });
    }

    let (frequency, indices) = match &spec.time {
        TimeSpec::Regular {
            start_year,
            start_period,
            frequency,
        } => {
            TimeSeries::new(vec![0.0], *start_year, *start_period, *frequency)?;
            let start = period_index(*start_year, *start_period, *frequency);
            (
                *frequency,
                (0..values.len() as i64).map(|i| start + i).collect(),
            )
        }
        TimeSpec::Year { year_col } => (1, integer_cells(table, year_col)?),
        TimeSpec::YearPeriod {
            year_col,
            period_col,
            frequency,
        } => {
            let f = frequency.unwrap_or_else(|| {
                if period_col.to_ascii_lowercase().starts_with('q') {
                    4
                } else {
                    12
                }
            });
            if !SUPPORTED_FREQUENCIES.contains(&f) {
                return Err(Error::UnsupportedFrequency(f));
            }
            let years = integer_cells(table, year_col)?;
            let periods = integer_cells(table, period_col)?;
            let idx = years
                .iter()
                .zip(&periods)
                .map(|(&y, &p)| {
                    if p < 1 || p > f as i64 {
                        return Err(Error::InvalidTimeIndex(format!(
                            "period {p} outside 1..={f} in `{period_col}`"
                        )));
                    }
                    Ok(y * f as i64 + p - 1)
                })
                .collect::<Result<Vec<_>>>()?;
            (f, idx)
        }
        TimeSpec::DateColumn {
            date_col,
            frequency,
        } => date_indices(table, date_col, *frequency)?,
    };

    let mut order: Vec<usize> = (0..indices.len()).collect();
    order.sort_by_key(|&i| indices[i]);
    for w in order.windows(2) {
        let (a, b) = (indices[w[0]], indices[w[1]]);
        if a == b {
            let (y, p) = split_index(a, frequency);
            return Err(Error::DuplicateTimestamp(format_time(y, p, frequency)));
        }
        if b != a + 1 {
            let (y, p) = split_index(a + 1, frequency);
            return Err(Error::GapInSeries(format_time(y, p, frequency)));
        }
    }

    let ordered: Vec<f64> = order
        .iter()
        .map(|&i| {
            values[i].ok_or_else(|| {
                let (y, p) = split_index(indices[i], frequency);
                Error::MissingValueInSeries(format_time(y, p, frequency))
            })
        })
        .collect::<Result<_>>()?;
    let (year, period) = split_index(indices[order[0]], frequency);
    TimeSeries::new(ordered, year, period, frequency)
}

fn integer_cells(table: &Table, name: &str) -> Result<Vec<i64>> {
    let col = table.column(name)?;
    let ColumnData::Integer(cells) = col.data() else {
        return Err(Error::TypeMismatch(format!(
            "time column `{name}` must hold integers, found {}",
            col.dtype()
        )));
    };
    cells
        .iter()
        .enumerate()
        .map(|(row, c)| {
            c.ok_or_else(|| {
                Error::InvalidTimeIndex(format!("`{name}` is missing in row {}", row + 1))
            })
        })
        .collect()
}

/// Period indices for a date column. Dates map to their month; the step
/// between consecutive months fixes the frequency (1 → 12, 3 → 4, 12 → 1).
fn date_indices(table: &Table, name: &str, frequency: Option<u32>) -> Result<(u32, Vec<i64>)> {
    use chrono::Datelike;
    let col = table.column(name)?;
    let ColumnData::Date(cells) = col.data() else {
        return Err(Error::TypeMismatch(format!(
            "time column `{name}` must hold dates, found {}",
            col.dtype()
        )));
    };
    let months: Vec<i64> = cells
        .iter()
        .enumerate()
        .map(|(row, d)| {
            let d = d.ok_or_else(|| {
                Error::InvalidTimeIndex(format!("`{name}` is missing in row {}", row + 1))
            })?;
            Ok(d.year() as i64 * 12 + d.month0() as i64)
        })
        .collect::<Result<_>>()?;

    let frequency = match frequency {
        Some(f) if SUPPORTED_FREQUENCIES.contains(&f) => f,
        Some(f) => return Err(Error::UnsupportedFrequency(f)),
        None => {
            let mut sorted = months.clone();
            sorted.sort_unstable();
            sorted.dedup();
            let step = sorted.windows(2).map(|w| w[1] - w[0]).min();
            match step {
                None | Some(1) => 12,
                Some(3) => 4,
                Some(12) => 1,
                Some(s) => {
                    return Err(Error::InvalidTimeIndex(format!(
                        "dates in `{name}` are {s} months apart; expected monthly, quarterly or annual spacing"
                    )))
                }
            }
        }
    };
    let step = 12 / frequency as i64;
    let mut offsets: HashMap<i64, usize> = HashMap::new();
    for m in &months {
        *offsets.entry(m.rem_euclid(step)).or_default() += 1;
    }
    if offsets.len() > 1 {
        return Err(Error::InvalidTimeIndex(format!(
            "dates in `{name}` do not fall on a regular {step}-month grid"
        )));
    }
    Ok((
        frequency,
        months.iter().map(|m| m.div_euclid(step)).collect(),
    ))
}

/// `order`-fold lag-`lag` differencing, `y_t = x_t − x_{t−lag}`. The result
/// starts `lag·order` periods later.
pub fn difference(series: &TimeSeries, lag: usize, order: usize) -> Result<TimeSeries> {
    if lag == 0 || order == 0 {
        return Err(Error::InvalidSpec(
            "lag and order must both be at least 1".into(),
        ));
    }
    let shift = lag * order;
    if series.len() <= shift {
        return Err(Error::SeriesTooShort {
            needed: shift + 1,
            got: series.len(),
        });
    }
    let values = diff_values(series.values(), lag, order);
    let (year, period) = series.time_at(shift);
    TimeSeries::new(values, year, period, series.frequency)
}

pub fn diff_values(x: &[f64], lag: usize, order: usize) -> Vec<f64> {
    let mut v = x.to_vec();
    for _ in 0..order {
        v = v.windows(lag + 1).map(|w| w[lag] - w[0]).collect();
    }
    v
}

/// Inverse of [`diff_values`]: rebuilds the series from its differences and
/// its first `lag·order` values.
pub fn integrate(diffs: &[f64], lag: usize, order: usize, head: &[f64]) -> Vec<f64> {
    assert_eq!(head.len(), lag * order, "head must hold lag·order values");
    let mut level = diffs.to_vec();
    for k in (0..order).rev() {
        let seed = diff_values(head, lag, k);
        let mut up: Vec<f64> = seed[..lag].to_vec();
        for (j, d) in level.iter().enumerate() {
            up.push(d + up[j]);
        }
        level = up;
    }
    level
}
