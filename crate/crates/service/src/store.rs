//! Filesystem dataset store: raw uploads kept under their SHA-256 digest,
//! plus a JSON manifest of records.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Utc};
use datadesk_core::table::{parse_csv, schema, ParseOptions, Schema, Table};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ApiError;

const MANIFEST: &str = "manifest.json";
const BLOBS: &str = "blobs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub name: String,
    pub created_at: DateTime<Utc>,
    pub byte_size: usize,
    pub schema: Schema,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    #[serde(flatten)]
    record: DatasetRecord,
    sha256: String,
    options: ParseOptions,
}

pub struct Store {
    dir: PathBuf,
    max_bytes: usize,
    entries: RwLock<Vec<ManifestEntry>>,
    // Serialises manifest rewrites; readers only take `entries`.
    writer: Mutex<()>,
    tables: RwLock<HashMap<String, Arc<Table>>>,
}

impl Store {
    /// Opens (creating if needed) the store rooted at `dir`.
    pub fn open(dir: impl Into<PathBuf>, max_bytes: usize) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join(BLOBS))?;
        let entries = match fs::read(dir.join(MANIFEST)) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(std::io::Error::other)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e),
        };
        Ok(Self {
            dir,
            max_bytes,
            entries: RwLock::new(entries),
            writer: Mutex::new(()),
            tables: RwLock::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn max_bytes(&self) -> usize {
        self.max_bytes
    }

    pub fn list(&self) -> Vec<DatasetRecord> {
        self.entries
            .read()
            .unwrap()
            .iter()
            .map(|e| e.record.clone())
            .collect()
    }

    pub fn record(&self, id: &str) -> Result<DatasetRecord, ApiError> {
        self.entry(id).map(|e| e.record)
    }

    /// Parses `bytes` and, if that succeeds, persists them under a new id.
    pub fn store(
        &self,
        bytes: &[u8],
        name: &str,
        options: &ParseOptions,
    ) -> Result<DatasetRecord, ApiError> {
        if bytes.len() > self.max_bytes {
            return Err(ApiError::payload_too_large(self.max_bytes));
        }
        let table = parse_csv(bytes, options)?;
        let digest = hex(&Sha256::digest(bytes));
        let blob = self.blob_path(&digest);
        if !blob.exists() {
            write_atomic(&blob, bytes)?;
        }
        let record = DatasetRecord {
            id: new_id(),
            name: name.to_owned(),
            created_at: Utc::now(),
            byte_size: bytes.len(),
            schema: schema(&table),
        };
        let entry = ManifestEntry {
            record: record.clone(),
            sha256: digest,
            options: options.clone(),
        };

        let _guard = self.writer.lock().unwrap();
        let mut next = self.entries.read().unwrap().clone();
        next.push(entry);
        let json = serde_json::to_vec_pretty(&next).map_err(std::io::Error::other)?;
        write_atomic(&self.dir.join(MANIFEST), &json)?;
        *self.entries.write().unwrap() = next;
        self.tables
            .write()
            .unwrap()
            .insert(record.id.clone(), Arc::new(table.with_name(name)));
        Ok(record)
    }

    /// Stores a derived table as a new dataset.
    pub fn store_table(&self, table: &Table, name: &str) -> Result<DatasetRecord, ApiError> {
        self.store(
            &datadesk_core::table::to_csv(table),
            name,
            &ParseOptions::default(),
        )
    }

    /// The uploaded bytes, exactly as received.
    pub fn bytes(&self, id: &str) -> Result<Vec<u8>, ApiError> {
        let entry = self.entry(id)?;
        Ok(fs::read(self.blob_path(&entry.sha256))?)
    }

    pub fn table(&self, id: &str) -> Result<Arc<Table>, ApiError> {
        if let Some(t) = self.tables.read().unwrap().get(id) {
            return Ok(t.clone());
        }
        let entry = self.entry(id)?;
        let bytes = fs::read(self.blob_path(&entry.sha256))?;
        let table = Arc::new(parse_csv(&bytes, &entry.options)?.with_name(entry.record.name));
        self.tables
            .write()
            .unwrap()
            .insert(id.to_owned(), table.clone());
        Ok(table)
    }

    fn entry(&self, id: &str) -> Result<ManifestEntry, ApiError> {
        self.entries
            .read()
            .unwrap()
            .iter()
            .find(|e| e.record.id == id)
            .cloned()
            .ok_or_else(|| ApiError::unknown_dataset(id))
    }

    fn blob_path(&self, digest: &str) -> PathBuf {
        self.dir.join(BLOBS).join(format!("{digest}.csv"))
    }
}

/// 16 random bytes, base64url without padding: 22 characters.
fn new_id() -> String {
    URL_SAFE_NO_PAD.encode(rand::random::<[u8; 16]>())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp-{}", new_id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)
}
