//! Chart-ready data for histograms, scatter, line and bar charts, plus a
//! deterministic SVG renderer for command-line output.

mod svg;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use svg::render_svg;

use crate::error::{Error, Result};
use crate::ops::FrequencyTable;
use crate::table::{ColumnData, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramData {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub n_used: usize,
}

/// Sturges' rule, `⌈log2(n) + 1⌉`.
pub fn sturges_bins(n: usize) -> usize {
    ((n.max(1) as f64).log2() + 1.0).ceil() as usize
}

/// Equal-width histogram over `[min, max]`. Bins are left-closed and
/// right-open except the last, which is closed. A zero-width range is
/// widened to `[v − 0.5, v + 0.5]`.
pub fn histogram(table: &Table, column: &str, n_bins: Option<usize>) -> Result<HistogramData> {
    let col = table.column(column)?;
    let cells = col
        .as_f64()
        .ok_or_else(|| Error::NonNumericColumn(column.to_owned()))?;
    let xs: Vec<f64> = cells.into_iter().flatten().collect();
    histogram_values(&xs, n_bins).map_err(|e| match e {
        Error::EmptyData => Error::AllMissing(column.to_owned()),
        other => other,
    })
}

pub fn histogram_values(xs: &[f64], n_bins: Option<usize>) -> Result<HistogramData> {
    if n_bins == Some(0) {
        return Err(Error::ZeroBins);
    }
    if xs.is_empty() {
        return Err(Error::EmptyData);
    }
    let k = n_bins.unwrap_or_else(|| sturges_bins(xs.len()));
    let (min, max) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let (lo, hi) = if min == max {
        (min - 0.5, max + 0.5)
    } else {
        (min, max)
    };
    let range = hi - lo;

    // Bin membership is decided on offsets from `lo`, which keeps the
    // counts exactly translation invariant for integer data.
    let offsets: Vec<f64> = (0..=k)
        .map(|i| {
            if i == k {
                range
            } else {
                range * i as f64 / k as f64
            }
        })
        .collect();
    let mut counts = vec![0usize; k];
    for &x in xs {
        let d = x - lo;
        let bin = offsets[1..k].partition_point(|&o| o <= d);
        counts[bin] += 1;
    }
    let mut edges: Vec<f64> = offsets.iter().map(|o| lo + o).collect();
    edges[k] = hi;
    Ok(HistogramData {
        edges,
        counts,
        n_used: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XyKind {
    Scatter,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XValue {
    Number(f64),
    Date(#[serde(with = "date_format")] NaiveDate),
}

impl XValue {
    /// Position on a numeric axis; dates count days from 1970-01-01.
    pub fn position(&self) -> f64 {
        match self {
            XValue::Number(x) => *x,
            XValue::Date(d) => {
                (*d - NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid")).num_days() as f64
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XyPoint {
    pub x: XValue,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XYSeries {
    pub kind: XyKind,
    pub points: Vec<XyPoint>,
}

/// Pairwise-complete `(x, y)` points; line series are stably sorted by x.
pub fn xy_series(table: &Table, x: &str, y: &str, kind: XyKind) -> Result<XYSeries> {
    let xcol = table.column(x)?;
    let ycol = table.column(y)?;
    let ys = ycol.as_f64().ok_or_else(|| {
        Error::TypeMismatch(format!(
            "y column `{y}` must be numeric, found {}",
            ycol.dtype()
        ))
    })?;
    let xs: Vec<Option<XValue>> = match xcol.data() {
        ColumnData::Date(v) => v.iter().map(|d| d.map(XValue::Date)).collect(),
        _ => xcol
            .as_f64()
            .ok_or_else(|| {
                Error::TypeMismatch(format!(
                    "x column `{x}` must be numeric or date, found {}",
                    xcol.dtype()
                ))
            })?
            .into_iter()
            .map(|v| v.map(XValue::Number))
            .collect(),
    };
    let mut points: Vec<XyPoint> = xs
        .into_iter()
        .zip(ys)
        .filter_map(|(x, y)| Some(XyPoint { x: x?, y: y? }))
        .collect();
    if kind == XyKind::Line {
        points.sort_by(|a, b| a.x.position().total_cmp(&b.x.position()));
    }
    Ok(XYSeries { kind, points })
}

/// A series drawn against time labels, optionally with a horizontal
/// reference line (the series mean for differenced data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPlotData {
    pub times: Vec<String>,
    pub values: Vec<f64>,
    pub reference_line: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum ChartData {
    Histogram(HistogramData),
    Xy(XYSeries),
    Bar(FrequencyTable),
    Series(SeriesPlotData),
}

mod date_format {
    use chrono::NaiveDate;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &NaiveDate, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&d.format("%Y-%m-%d"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
        let s = String::deserialize(d)?;
        NaiveDate::parse_from_str(&s, "%Y-%m-%d").map_err(serde::de::Error::custom)
    }
}
