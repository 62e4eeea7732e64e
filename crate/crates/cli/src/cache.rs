//! Persistent result cache keyed by a SHA-256 content hash.
//!
//! Entries are JSON files `<key>.json` written by temp-file + rename. A
//! corrupt entry counts as a miss and is overwritten by the next `put`; an
//! unwritable directory degrades to an in-memory map.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::{write_atomic, ResultTable};

/// Bumped whenever the stored layout or the numerics change meaning.
pub const CACHE_FORMAT: u32 = 1;

/// Hash of (operation, canonical arguments, canonical quadrature settings).
pub fn cache_key(operation: &str, args: &str, quad: &str) -> String {
    let mut h = Sha256::new();
    for part in [format!("nplab-cache-v{CACHE_FORMAT}"), env!("CARGO_PKG_VERSION").into(), operation.into()] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    h.update(args.as_bytes());
    h.update([0u8]);
    h.update(quad.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CacheEntry {
    pub format: u32,
    pub key: String,
    pub value: ResultTable,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CacheError {
    Malformed(String),
    Format(u32),
    KeyMismatch,
}

impl fmt::Display for CacheError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            CacheError::Malformed(m) => write!(f, "malformed cache entry: {m}"),
            CacheError::Format(v) => write!(f, "cache entry format {v}, expected {CACHE_FORMAT}"),
            CacheError::KeyMismatch => write!(f, "cache entry stored under a different key"),
        }
    }
}

impl std::error::Error for CacheError {}

/// Decodes and validates a stored entry.
pub fn decode_entry(bytes: &[u8], expected_key: Option<&str>) -> Result<CacheEntry, CacheError> {
    let e: CacheEntry = serde_json::from_slice(bytes).map_err(|e| CacheError::Malformed(e.to_string()))?;
    if e.format != CACHE_FORMAT {
        return Err(CacheError::Format(e.format));
    }
    if expected_key.is_some_and(|k| k != e.key) || e.key.len() != 64 || !e.key.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(CacheError::KeyMismatch);
    }
    Ok(e)
}

pub fn encode_entry(key: &str, value: &ResultTable) -> Vec<u8> {
    let e = CacheEntry { format: CACHE_FORMAT, key: key.into(), value: value.clone() };
    serde_json::to_vec(&e).expect("cache entries serialize to JSON")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    Disabled,
    Memory,
    Disk,
}

pub struct Cache {
    dir: Option<PathBuf>,
    memory: Mutex<HashMap<String, Vec<u8>>>,
    enabled: bool,
    warnings: Mutex<Vec<String>>,
}

impl Cache {
    pub fn disabled() -> Self {
        Cache { dir: None, memory: Mutex::new(HashMap::new()), enabled: false, warnings: Mutex::new(vec![]) }
    }

    pub fn in_memory() -> Self {
        Cache { enabled: true, ..Cache::disabled() }
    }

    /// Opens a disk cache, falling back to memory when `dir` cannot be
    /// created or written.
    pub fn open(dir: &Path) -> Self {
        let cache = Cache::in_memory();
        let probe = std::fs::create_dir_all(dir).and_then(|_| tempfile::NamedTempFile::new_in(dir).map(|_| ()));
        match probe {
            Ok(()) => Cache { dir: Some(dir.to_path_buf()), ..cache },
            Err(e) => {
                cache.warn(format!("cache directory {} is not writable ({e}); using an in-memory cache", dir.display()));
                cache
            }
        }
    }

    pub fn mode(&self) -> CacheMode {
        match (self.enabled, &self.dir) {
            (false, _) => CacheMode::Disabled,
            (true, None) => CacheMode::Memory,
            (true, Some(_)) => CacheMode::Disk,
        }
    }

    fn warn(&self, msg: String) {
        log::warn!("{msg}");
        self.warnings.lock().unwrap().push(msg);
    }

    /// Warnings issued so far.
    pub fn warnings(&self) -> Vec<String> {
        self.warnings.lock().unwrap().clone()
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Option<ResultTable> {
        if !self.enabled {
            return None;
        }
        let bytes = match self.path(key) {
            Some(p) => match std::fs::read(&p) {
                Ok(b) => b,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => return None,
                Err(e) => {
                    self.warn(format!("cannot read cache entry {}: {e}; recomputing", p.display()));
                    return None;
                }
            },
            None => self.memory.lock().unwrap().get(key)?.clone(),
        };
        match decode_entry(&bytes, Some(key)) {
            Ok(e) => Some(e.value),
            Err(e) => {
                self.warn(format!("{e}; recomputing and overwriting entry {key}"));
                None
            }
        }
    }

    pub fn put(&self, key: &str, value: &ResultTable) {
        if !self.enabled {
            return;
        }
        let bytes = encode_entry(key, value);
        if let Some(p) = self.path(key) {
            if let Err(e) = write_atomic(&p, &bytes) {
                self.warn(format!("cannot write cache entry {}: {e}; keeping it in memory", p.display()));
            } else {
                return;
            }
        }
        self.memory.lock().unwrap().insert(key.to_string(), bytes);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::Table;

    fn table() -> ResultTable {
        ResultTable::new("x", Table::s_rows(&[0.1, 0.2], &[1.0 / 3.0, f64::INFINITY]))
    }

    #[test]
    fn keys_depend_on_every_part() {
        let k = cache_key("op", "{\"a\":1}", "{\"rel_tol\":1e-8}");
        assert_eq!(k.len(), 64);
        assert_ne!(k, cache_key("op2", "{\"a\":1}", "{\"rel_tol\":1e-8}"));
        assert_ne!(k, cache_key("op", "{\"a\":2}", "{\"rel_tol\":1e-8}"));
        assert_ne!(k, cache_key("op", "{\"a\":1}", "{\"rel_tol\":1e-9}"));
        assert_eq!(k, cache_key("op", "{\"a\":1}", "{\"rel_tol\":1e-8}"));
    }

    #[test]
    fn disk_round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path());
        assert_eq!(c.mode(), CacheMode::Disk);
        let k = cache_key("op", "a", "q");
        assert!(c.get(&k).is_none());
        c.put(&k, &table());
        let got = c.get(&k).unwrap();
        assert_eq!(got.table.to_csv(), table().table.to_csv());
        std::fs::write(dir.path().join(format!("{k}.json")), b"{garbage").unwrap();
        assert!(c.get(&k).is_none());
        assert!(c.warnings().iter().any(|w| w.contains("recomputing")));
        c.put(&k, &table());
        assert!(c.get(&k).is_some());
    }

    #[test]
    fn unwritable_directory_falls_back_to_memory() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain-file");
        std::fs::write(&file, b"x").unwrap();
        let c = Cache::open(&file.join("sub"));
        assert_eq!(c.mode(), CacheMode::Memory);
        assert!(!c.warnings().is_empty());
        let k = cache_key("op", "a", "q");
        c.put(&k, &table());
        assert!(c.get(&k).is_some());
    }

    #[test]
    fn disabled_cache_stores_nothing() {
        let c = Cache::disabled();
        let k = cache_key("op", "a", "q");
        c.put(&k, &table());
        assert!(c.get(&k).is_none());
    }

    #[test]
    fn decode_rejects_wrong_key_and_format() {
        let k = cache_key("op", "a", "q");
        let bytes = encode_entry(&k, &table());
        assert!(decode_entry(&bytes, Some(&k)).is_ok());
        assert_eq!(decode_entry(&bytes, Some(&cache_key("op", "b", "q"))), Err(CacheError::KeyMismatch));
        let other = String::from_utf8(bytes).unwrap().replacen("\"format\":1", "\"format\":9", 1);
        assert_eq!(decode_entry(other.as_bytes(), None), Err(CacheError::Format(9)));
    }
}
