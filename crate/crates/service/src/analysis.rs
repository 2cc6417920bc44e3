//! Request bodies and the operations behind each analysis endpoint. The
//! CLI calls the same functions, so both interfaces return identical JSON.
//!
//! Canonical encodings:
//!
//! * predicate: `{"column": "age", "op": ">=", "value": 18}`, combined with
//!   `{"and": [..]}`, `{"or": [..]}` and `{"not": p}`; `op` is one of
//!   `== != < <= > >= contains is_missing not_missing`.
//! * aggregation: `{"group_keys": ["region"], "measures": [{"column": "sales", "function": "sum"}]}`.
//! * series: `{"value_col": "sales", "time": {...}}` where `time` is one of
//!   `{"date_col": "month"}`, `{"year_col": "y", "period_col": "m"}`,
//!   `{"year_col": "y"}` or `{"start_year": 2001, "start_period": 1, "frequency": 12}`.
//! * model: `{"p": 1, "d": 1, "q": 1, "P": 0, "D": 1, "Q": 1, "s": 12, "include_mean": false}`.
//! * chart data is tagged by `chart`: `histogram`, `xy`, `bar` or `series`.

use datadesk_core::charts::{histogram, xy_series, ChartData, SeriesPlotData, XyKind};
use datadesk_core::ops::{
    filter_rows, group_aggregate, select_columns, summarize_column, value_counts, AggregationSpec,
    ColumnSummary, FrequencyTable, Predicate,
};
use datadesk_core::table::{DType, Table, Value};
use datadesk_core::timeseries::arima::{max_horizon, DEFAULT_LEVELS};
use datadesk_core::timeseries::{
    auto_fit, build_series, difference, fit_arima, forecast, kpss_test, ljung_box, ndiffs,
    ArimaModel, ArimaSpec, Forecast, KpssResult, LjungBoxResult, SeriesSpec, TimeSeries,
};
use datadesk_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const DEFAULT_PAGE: usize = 100;
pub const MAX_PAGE: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnHeader {
    pub name: String,
    pub dtype: DType,
}

/// A window of rows in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowsPage {
    pub offset: usize,
    /// Rows in the whole table, not just this page.
    pub n_rows: usize,
    pub columns: Vec<ColumnHeader>,
    pub rows: Vec<Vec<Option<Value>>>,
}

pub fn rows_page(table: &Table, offset: usize, limit: usize) -> RowsPage {
    RowsPage {
        offset,
        n_rows: table.n_rows(),
        columns: table
            .columns()
            .iter()
            .map(|c| ColumnHeader {
                name: c.name().to_owned(),
                dtype: c.dtype(),
            })
            .collect(),
        rows: table.rows(offset, limit),
    }
}

pub fn all_rows(table: &Table) -> RowsPage {
    rows_page(table, 0, table.n_rows())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRequest {
    pub predicate: Predicate,
    #[serde(default)]
    pub materialize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectRequest {
    pub columns: Vec<String>,
    #[serde(default)]
    pub materialize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRequest {
    #[serde(flatten)]
    pub spec: AggregationSpec,
    #[serde(default)]
    pub materialize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRequest {
    pub column: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Histogram,
    Scatter,
    Line,
    Bar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartRequest {
    pub kind: ChartKind,
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LjungBoxRequest {
    #[serde(flatten)]
    pub series: SeriesSpec,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    #[serde(default)]
    pub fitdf: usize,
}

fn default_max_lag() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdiffsRequest {
    #[serde(flatten)]
    pub series: SeriesSpec,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_max_d")]
    pub max_d: usize,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_max_d() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffRequest {
    #[serde(flatten)]
    pub series: SeriesSpec,
    #[serde(default = "one")]
    pub lag: usize,
    #[serde(default = "one")]
    pub order: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRequest {
    #[serde(flatten)]
    pub series: SeriesSpec,
    /// Absent means automatic order selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ArimaSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastRequest {
    #[serde(flatten)]
    pub series: SeriesSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ArimaSpec>,
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResponse {
    pub n: usize,
    pub frequency: u32,
    pub start: String,
    pub end: String,
    /// Largest forecast horizon accepted for this series.
    pub max_horizon: usize,
    pub plot: SeriesPlotData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NdiffsResponse {
    pub ndiffs: usize,
    pub alpha: f64,
    pub max_d: usize,
    /// KPSS test on the undifferenced series.
    pub kpss: KpssResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResponse {
    pub label: String,
    pub model: ArimaModel,
}

pub fn filter(table: &Table, req: &FilterRequest) -> Result<Table> {
    filter_rows(table, &req.predicate)
}

pub fn select(table: &Table, req: &SelectRequest) -> Result<Table> {
    select_columns(table, &req.columns)
}

pub fn aggregate(table: &Table, req: &AggregateRequest) -> Result<Table> {
    group_aggregate(table, &req.spec)
}

pub fn summary(table: &Table, req: &ColumnRequest) -> Result<ColumnSummary> {
    summarize_column(table, &req.column)
}

pub fn counts(table: &Table, req: &ColumnRequest) -> Result<FrequencyTable> {
    value_counts(table, &req.column)
}

pub fn chart(table: &Table, req: &ChartRequest) -> Result<ChartData> {
    let wanted = match req.kind {
        ChartKind::Histogram | ChartKind::Bar => 1,
        ChartKind::Scatter | ChartKind::Line => 2,
    };
    if req.columns.len() != wanted {
        return Err(Error::InvalidSpec(
            format!(
                "{:?} chart takes {wanted} column(s), got {}",
                req.kind,
                req.columns.len()
            )
            .to_lowercase(),
        ));
    }
    let c = &req.columns;
    Ok(match req.kind {
        ChartKind::Histogram => ChartData::Histogram(histogram(table, &c[0], req.bins)?),
        ChartKind::Bar => ChartData::Bar(value_counts(table, &c[0])?),
        ChartKind::Scatter => ChartData::Xy(xy_series(table, &c[0], &c[1], XyKind::Scatter)?),
        ChartKind::Line => ChartData::Xy(xy_series(table, &c[0], &c[1], XyKind::Line)?),
    })
}

pub fn series(table: &Table, spec: &SeriesSpec) -> Result<SeriesResponse> {
    let s = build_series(table, spec)?;
    Ok(SeriesResponse {
        n: s.len(),
        frequency: s.frequency(),
        start: s.label(0),
        end: s.label(s.len() - 1),
        max_horizon: max_horizon(s.frequency()),
        plot: s.plot_data(false),
    })
}

pub fn ljung_box_test(table: &Table, req: &LjungBoxRequest) -> Result<LjungBoxResult> {
    let s = build_series(table, &req.series)?;
    ljung_box(s.values(), req.max_lag, req.fitdf)
}

pub fn differencing_order(table: &Table, req: &NdiffsRequest) -> Result<NdiffsResponse> {
    let s = build_series(table, &req.series)?;
    let d = ndiffs(s.values(), req.alpha, req.max_d)?;
    Ok(NdiffsResponse {
        ndiffs: d,
        alpha: req.alpha,
        max_d: req.max_d,
        kpss: kpss_test(s.values())?,
    })
}

pub fn diff(table: &Table, req: &DiffRequest) -> Result<SeriesPlotData> {
    let s = build_series(table, &req.series)?;
    Ok(difference(&s, req.lag, req.order)?.plot_data(true))
}

fn fit_model(s: &TimeSeries, spec: Option<&ArimaSpec>) -> Result<ArimaModel> {
    match spec {
        Some(spec) => fit_arima(s, spec),
        None => auto_fit(s),
    }
}

pub fn fit(table: &Table, req: &FitRequest) -> Result<FitResponse> {
    let s = build_series(table, &req.series)?;
    let model = fit_model(&s, req.spec.as_ref())?;
    Ok(FitResponse {
        label: model.spec.to_string(),
        model,
    })
}

/// Fits (or auto-selects) a model and forecasts `horizon` steps, which must
/// lie in `[1, 5·frequency]`.
pub fn forecast_series(table: &Table, req: &ForecastRequest) -> Result<Forecast> {
    let s = build_series(table, &req.series)?;
    if req.horizon == 0 || req.horizon > max_horizon(s.frequency()) {
        return Err(Error::HorizonOutOfRange(req.horizon));
    }
    let model = fit_model(&s, req.spec.as_ref())?;
    forecast(
        &model,
        req.horizon,
        req.levels.as_deref().unwrap_or(&DEFAULT_LEVELS),
    )
}
