//! HTTP/JSON front end for datadesk: upload CSV datasets, then explore,
//! summarise, chart and forecast them.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/api/datasets` | multipart (`file`, optional `name`, `options`) or raw CSV with `?name=` |
//! | GET | `/api/datasets` | |
//! | GET | `/api/datasets/{id}` | |
//! | GET | `/api/datasets/{id}/raw` | |
//! | GET | `/api/datasets/{id}/schema` | |
//! | GET | `/api/datasets/{id}/rows?offset&limit` | |
//! | POST | `/api/datasets/{id}/filter` | [`analysis::FilterRequest`] |
//! | POST | `/api/datasets/{id}/select` | [`analysis::SelectRequest`] |
//! | POST | `/api/datasets/{id}/aggregate` | [`analysis::AggregateRequest`] |
//! | POST | `/api/datasets/{id}/summary` | [`analysis::ColumnRequest`] |
//! | POST | `/api/datasets/{id}/value_counts` | [`analysis::ColumnRequest`] |
//! | POST | `/api/datasets/{id}/chart` | [`analysis::ChartRequest`] |
//! | POST | `/api/datasets/{id}/series` | series spec |
//! | POST | `/api/datasets/{id}/ljung_box` | [`analysis::LjungBoxRequest`] |
//! | POST | `/api/datasets/{id}/ndiffs` | [`analysis::NdiffsRequest`] |
//! | POST | `/api/datasets/{id}/diff` | [`analysis::DiffRequest`] |
//! | POST | `/api/datasets/{id}/fit` | [`analysis::FitRequest`] |
//! | POST | `/api/datasets/{id}/forecast` | [`analysis::ForecastRequest`] |
//! | GET | `/healthz` | |
//!
//! Errors are returned as [`ApiError`] bodies.

pub mod analysis;
mod error;
mod routes;
pub mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

pub use error::ApiError;
pub use routes::router;
pub use store::{DatasetRecord, Store};

pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone)]
pub struct Config {
    pub data_dir: PathBuf,
    pub bind: SocketAddr,
    pub max_upload_bytes: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("datadesk-data"),
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
        }
    }
}

impl Config {
    /// Defaults overridden by `DATADESK_DATA_DIR`, `DATADESK_BIND` and
    /// `DATADESK_MAX_UPLOAD_BYTES`.
    pub fn from_env() -> Result<Self, String> {
        let mut config = Self::default();
        if let Ok(dir) = std::env::var("DATADESK_DATA_DIR") {
            config.data_dir = dir.into();
        }
        if let Ok(bind) = std::env::var("DATADESK_BIND") {
            config.bind = bind.parse().map_err(|e| format!("DATADESK_BIND: {e}"))?;
        }
        if let Ok(max) = std::env::var("DATADESK_MAX_UPLOAD_BYTES") {
            config.max_upload_bytes = max
                .parse()
                .map_err(|e| format!("DATADESK_MAX_UPLOAD_BYTES: {e}"))?;
        }
        Ok(config)
    }
}

/// Opens the store and serves until Ctrl-C.
pub async fn serve(config: Config) -> std::io::Result<()> {
    let store = Arc::new(Store::open(&config.data_dir, config.max_upload_bytes)?);
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!(
        "listening on {} with data in {}",
        listener.local_addr()?,
        config.data_dir.display()
    );
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
