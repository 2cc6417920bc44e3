#![allow(dead_code)]

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use datadesk_service::{router, Store};
use http_body_util::BodyExt;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

pub struct App {
    pub dir: TempDir,
    pub store: Arc<Store>,
    pub router: Router,
}

impl App {
    pub fn new() -> Self {
        Self::with_limit(datadesk_service::DEFAULT_MAX_UPLOAD_BYTES)
    }

    pub fn with_limit(max_bytes: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(Store::open(dir.path(), max_bytes).unwrap());
        Self {
            router: router(store.clone()),
            store,
            dir,
        }
    }

    /// A fresh process over the same data directory.
    pub fn restart(self) -> Self {
        let store = Arc::new(Store::open(self.dir.path(), self.store.max_bytes()).unwrap());
        Self {
            router: router(store.clone()),
            store,
            dir: self.dir,
        }
    }

    pub async fn send(&self, req: Request<Body>) -> (StatusCode, Vec<u8>) {
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let body = resp
            .into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec();
        (status, body)
    }

    pub async fn get(&self, path: &str) -> (StatusCode, Value) {
        let (status, body) = self
            .send(Request::get(path).body(Body::empty()).unwrap())
            .await;
        (status, serde_json::from_slice(&body).unwrap())
    }

    pub async fn post(&self, path: &str, body: &Value) -> (StatusCode, Value) {
        self.post_raw(path, "application/json", body.to_string().into_bytes())
            .await
    }

    pub async fn post_raw(
        &self,
        path: &str,
        content_type: &str,
        body: Vec<u8>,
    ) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(Method::POST)
            .uri(path)
            .header(header::CONTENT_TYPE, content_type)
            .body(Body::from(body))
            .unwrap();
        let (status, body) = self.send(req).await;
        (status, serde_json::from_slice(&body).unwrap())
    }

    /// Uploads CSV text and returns the new dataset id.
    pub async fn upload(&self, csv: &str) -> String {
        let (status, record) = self
            .post_raw(
                "/api/datasets?name=test.csv",
                "text/csv",
                csv.as_bytes().to_vec(),
            )
            .await;
        assert_eq!(status, StatusCode::CREATED, "{record}");
        record["id"].as_str().unwrap().to_owned()
    }
}

pub fn multipart(boundary: &str, parts: &[(&str, Option<&str>, &[u8])]) -> Vec<u8> {
    let mut body = Vec::new();
    for (name, filename, data) in parts {
        body.extend_from_slice(format!("--{boundary}\r\n").as_bytes());
        match filename {
            Some(f) => body.extend_from_slice(
                format!("Content-Disposition: form-data; name=\"{name}\"; filename=\"{f}\"\r\n")
                    .as_bytes(),
            ),
            None => body.extend_from_slice(
                format!("Content-Disposition: form-data; name=\"{name}\"\r\n").as_bytes(),
            ),
        }
        body.extend_from_slice(b"\r\n");
        body.extend_from_slice(data);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    body
}

/// Monthly sales with trend, seasonality and noise from a fixed LCG.
pub fn monthly_csv(n: usize) -> String {
    let mut s = 12345u64;
    let mut out = String::from("year,month,sales\n");
    for i in 0..n {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let noise = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        let t = i as f64;
        let v =
            100.0 + 0.8 * t + 12.0 * (2.0 * std::f64::consts::PI * t / 12.0).sin() + 4.0 * noise;
        out.push_str(&format!("{},{},{:.3}\n", 2010 + i / 12, i % 12 + 1, v));
    }
    out
}

pub fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap()
}
