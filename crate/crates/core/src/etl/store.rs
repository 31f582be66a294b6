//! Dataset store: observations keyed by change id, kept in first-insertion
//! order.
//!
//! The file-backed store is a single JSON document:
//!
//! ```json
//! { "schema": "reviewq-dataset/v1", "rows": [ <Observation>, ... ] }
//! ```
//!
//! Writes go to a sibling temporary file that is renamed over the original.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use thiserror::Error;

use super::transform::Observation;

pub const DATASET_SCHEMA: &str = "reviewq-dataset/v1";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("dataset store unavailable at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("dataset store at {path} is corrupt: {reason}")]
    Corrupt { path: PathBuf, reason: String },
}

pub trait DatasetStore: Send + Sync {
    /// All rows in insertion order.
    fn load(&self) -> Result<Vec<Observation>, StoreError>;

    /// Inserts new rows and replaces rows whose `change_id` already exists.
    fn upsert(&self, rows: &[Observation]) -> Result<(), StoreError>;
}

pub fn load_dataset(store: &dyn DatasetStore) -> Result<Vec<Observation>, StoreError> {
    store.load()
}

pub fn store_dataset(store: &dyn DatasetStore, rows: &[Observation]) -> Result<(), StoreError> {
    store.upsert(rows)
}

fn merge(into: &mut IndexMap<String, Observation>, rows: &[Observation]) {
    for row in rows {
        into.insert(row.change_id.clone(), row.clone());
    }
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    rows: Mutex<IndexMap<String, Observation>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        MemoryStore::default()
    }

    pub fn with_rows(rows: &[Observation]) -> Self {
        let store = MemoryStore::new();
        merge(&mut store.rows.lock().unwrap(), rows);
        store
    }

    pub fn clear(&self) {
        self.rows.lock().unwrap().clear();
    }
}

impl DatasetStore for MemoryStore {
    fn load(&self) -> Result<Vec<Observation>, StoreError> {
        Ok(self.rows.lock().unwrap().values().cloned().collect())
    }

    fn upsert(&self, rows: &[Observation]) -> Result<(), StoreError> {
        merge(&mut self.rows.lock().unwrap(), rows);
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetDoc {
    schema: String,
    rows: Vec<Observation>,
}

/// Single-file JSON store. A missing file reads as an empty dataset.
#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    write_lock: Mutex<()>,
}

impl FileStore {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FileStore { path: path.into(), write_lock: Mutex::new(()) }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn io(&self, source: io::Error) -> StoreError {
        StoreError::Io { path: self.path.clone(), source }
    }

    fn read(&self) -> Result<IndexMap<String, Observation>, StoreError> {
        let bytes = match fs::read(&self.path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(IndexMap::new()),
            Err(e) => return Err(self.io(e)),
        };
        let doc: DatasetDoc = serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            path: self.path.clone(),
            reason: e.to_string(),
        })?;
        if doc.schema != DATASET_SCHEMA {
            return Err(StoreError::Corrupt {
                path: self.path.clone(),
                reason: format!("unknown schema `{}`", doc.schema),
            });
        }
        let mut map = IndexMap::with_capacity(doc.rows.len());
        merge(&mut map, &doc.rows);
        Ok(map)
    }
}

impl DatasetStore for FileStore {
    fn load(&self) -> Result<Vec<Observation>, StoreError> {
        Ok(self.read()?.into_values().collect())
    }

    fn upsert(&self, rows: &[Observation]) -> Result<(), StoreError> {
        let _guard = self.write_lock.lock().unwrap();
        let mut map = self.read()?;
        merge(&mut map, rows);
        let doc = DatasetDoc {
            schema: DATASET_SCHEMA.to_string(),
            rows: map.into_values().collect(),
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).expect("dataset serializes");
        bytes.push(b'\n');
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| self.io(e))?;
        }
        let mut tmp = self.path.clone().into_os_string();
        tmp.push(".tmp");
        let tmp = PathBuf::from(tmp);
        fs::write(&tmp, &bytes).map_err(|e| self.io(e))?;
        fs::rename(&tmp, &self.path).map_err(|e| self.io(e))
    }
}
