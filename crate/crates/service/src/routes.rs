use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use datadesk_core::table::{schema, ParseOptions, Schema, Table};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{self, RowsPage};
use crate::error::ApiError;
use crate::store::{DatasetRecord, Store};

// Multipart framing on top of the payload itself.
const MULTIPART_SLACK: usize = 64 * 1024;

type AppState = Arc<Store>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(store: Arc<Store>) -> Router {
    let limit = store.max_bytes().saturating_add(MULTIPART_SLACK);
    Router::new()
        .route(
            "/healthz",
            get(|| async { Json(json!({ "status": "ok" })) }),
        )
        .route("/api/datasets", get(list).post(upload))
        .route("/api/datasets/{id}", get(record))
        .route("/api/datasets/{id}/raw", get(raw))
        .route("/api/datasets/{id}/schema", get(dataset_schema))
        .route("/api/datasets/{id}/rows", get(rows))
        .route("/api/datasets/{id}/filter", post(filter))
        .route("/api/datasets/{id}/select", post(select))
        .route("/api/datasets/{id}/aggregate", post(aggregate))
        .route("/api/datasets/{id}/summary", post(summary))
        .route("/api/datasets/{id}/value_counts", post(value_counts))
        .route("/api/datasets/{id}/chart", post(chart))
        .route("/api/datasets/{id}/series", post(series))
        .route("/api/datasets/{id}/ljung_box", post(ljung_box))
        .route("/api/datasets/{id}/ndiffs", post(ndiffs))
        .route("/api/datasets/{id}/diff", post(diff))
        .route("/api/datasets/{id}/fit", post(fit))
        .route("/api/datasets/{id}/forecast", post(forecast))
        .fallback(|| async { ApiError::not_found("no such route") })
        .layer(DefaultBodyLimit::max(limit))
        .with_state(store)
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

async fn list(State(store): State<AppState>) -> Json<Vec<DatasetRecord>> {
    Json(store.list())
}

#[derive(Debug, Deserialize)]
struct UploadQuery {
    name: Option<String>,
}

async fn upload(
    State(store): State<AppState>,
    query: Result<Query<UploadQuery>, QueryRejection>,
    req: Request,
) -> ApiResult<(StatusCode, Json<DatasetRecord>)> {
    let Query(query) = query?;
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));

    let mut name = query.name;
    let mut options = ParseOptions::default();
    let bytes = if is_multipart {
        let mut multipart = Multipart::from_request(req, &store)
            .await
            .map_err(|e| ApiError::bad_request(e.body_text()))?;
        let mut file = None;
        while let Some(field) = multipart.next_field().await? {
            match field.name() {
                Some("file") => {
                    if name.is_none() {
                        name = field.file_name().map(str::to_owned);
                    }
                    file = Some(field.bytes().await?);
                }
                Some("name") => name = Some(field.text().await?),
                Some("options") => {
                    options = serde_json::from_str(&field.text().await?).map_err(|e| {
                        ApiError::bad_request(format!("invalid parse options: {e}"))
                    })?;
                }
                _ => {}
            }
        }
        file.ok_or_else(|| ApiError::bad_request("multipart body has no `file` field"))?
    } else {
        Bytes::from_request(req, &store).await?
    };
    if bytes.len() > store.max_bytes() {
        return Err(ApiError::payload_too_large(store.max_bytes()));
    }

    let name = name.unwrap_or_else(|| "dataset.csv".to_owned());
    let record = blocking(move || store.store(&bytes, &name, &options)).await?;
    tracing::info!(id = %record.id, bytes = record.byte_size, "stored dataset");
    Ok((StatusCode::CREATED, Json(record)))
}

async fn record(
    State(store): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<DatasetRecord>> {
    Ok(Json(store.record(&id)?))
}

async fn raw(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let bytes = blocking(move || store.bytes(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], bytes).into_response())
}

async fn dataset_schema(
    State(store): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<Json<Schema>> {
    let table = blocking(move || store.table(&id)).await?;
    Ok(Json(schema(&table)))
}

#[derive(Debug, Deserialize)]
struct PageQuery {
    #[serde(default)]
    offset: usize,
    limit: Option<usize>,
}

async fn rows(
    State(store): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<PageQuery>, QueryRejection>,
) -> ApiResult<Json<RowsPage>> {
    let Query(q) = query?;
    let limit = q.limit.unwrap_or(analysis::DEFAULT_PAGE);
    if limit > analysis::MAX_PAGE {
        return Err(
            ApiError::bad_request(format!("limit must be at most {}", analysis::MAX_PAGE))
                .with_detail(json!({ "limit": limit })),
        );
    }
    let table = blocking(move || store.table(&id)).await?;
    Ok(Json(analysis::rows_page(&table, q.offset, limit)))
}

/// Loads the dataset, decodes the body and runs `op` off the async runtime.
async fn run<Req, Resp>(
    store: AppState,
    id: String,
    body: Result<Json<Req>, JsonRejection>,
    op: fn(&Table, &Req) -> datadesk_core::Result<Resp>,
) -> ApiResult<Json<Resp>>
where
    Req: DeserializeOwned + Send + 'static,
    Resp: Serialize + Send + 'static,
{
    let Json(req) = body?;
    blocking(move || {
        let table = store.table(&id)?;
        Ok(Json(op(&table, &req)?))
    })
    .await
}

/// Like [`run`] for operations producing a table, which is either returned
/// inline or stored as a new dataset.
async fn run_table<Req>(
    store: AppState,
    id: String,
    body: Result<Json<Req>, JsonRejection>,
    materialize: fn(&Req) -> bool,
    suffix: &'static str,
    op: fn(&Table, &Req) -> datadesk_core::Result<Table>,
) -> ApiResult<Response>
where
    Req: DeserializeOwned + Send + 'static,
{
    let Json(req) = body?;
    blocking(move || {
        let table = store.table(&id)?;
        let out = op(&table, &req)?;
        if materialize(&req) {
            let name = format!("{}-{suffix}", store.record(&id)?.name);
            let record = store.store_table(&out, &name)?;
            Ok((StatusCode::CREATED, Json(record)).into_response())
        } else {
            Ok(Json(analysis::all_rows(&out)).into_response())
        }
    })
    .await
}

async fn filter(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<analysis::FilterRequest>, JsonRejection>,
) -> ApiResult<Response> {
    run_table(
        store,
        id,
        body,
        |r| r.materialize,
        "filtered",
        analysis::filter,
    )
    .await
}

async fn select(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<analysis::SelectRequest>, JsonRejection>,
) -> ApiResult<Response> {
    run_table(
        store,
        id,
        body,
        |r| r.materialize,
        "selected",
        analysis::select,
    )
    .await
}

async fn aggregate(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<analysis::AggregateRequest>, JsonRejection>,
) -> ApiResult<Response> {
    run_table(
        store,
        id,
        body,
        |r| r.materialize,
        "aggregated",
        analysis::aggregate,
    )
    .await
}

macro_rules! analysis_endpoint {
    ($name:ident, $req:ty, $op:path) => {
        async fn $name(
            State(store): State<AppState>,
            Path(id): Path<String>,
            body: Result<Json<$req>, JsonRejection>,
        ) -> impl IntoResponse {
            run(store, id, body, $op).await
        }
    };
}

analysis_endpoint!(summary, analysis::ColumnRequest, analysis::summary);
analysis_endpoint!(value_counts, analysis::ColumnRequest, analysis::counts);
analysis_endpoint!(chart, analysis::ChartRequest, analysis::chart);
analysis_endpoint!(
    series,
    datadesk_core::timeseries::SeriesSpec,
    analysis::series
);
analysis_endpoint!(
    ljung_box,
    analysis::LjungBoxRequest,
    analysis::ljung_box_test
);
analysis_endpoint!(
    ndiffs,
    analysis::NdiffsRequest,
    analysis::differencing_order
);
analysis_endpoint!(diff, analysis::DiffRequest, analysis::diff);
analysis_endpoint!(fit, analysis::FitRequest, analysis::fit);
analysis_endpoint!(
    forecast,
    analysis::ForecastRequest,
    analysis::forecast_series
);
