//! Content-addressed response cache.
//!
//! Each response lives at `{cache_dir}/{first two hex of key}/{key}.json`
//! together with enough request metadata to audit it. Writes go through a
//! temp file plus rename so concurrent writers never expose partial files.
//! The API key is never part of an entry.

use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RequestMeta {
    pub item_id: String,
    pub repetition: u32,
    pub model_name: String,
    pub temperature: f64,
    pub prompt_digest: String,
    pub image_digest: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CacheEntry {
    pub request_meta: RequestMeta,
    pub response_text: String,
    pub timestamp: String,
    pub backend: String,
}

#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    counter: AtomicU64,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResponseCache {
            dir: dir.into(),
            counter: AtomicU64::new(0),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    /// Returns the cached entry, or `None` on miss. Corrupt entries count
    /// as misses so a damaged cache degrades to re-fetching.
    pub fn get(&self, key: &str) -> Option<CacheEntry> {
        let path = self.entry_path(key);
        let raw = fs::read_to_string(&path).ok()?;
        match serde_json::from_str(&raw) {
            Ok(entry) => Some(entry),
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "ignoring corrupt cache entry");
                None
            }
        }
    }

    /// Atomic write-then-rename; safe under concurrent writers.
    pub fn put(&self, key: &str, entry: &CacheEntry) -> io::Result<()> {
        let path = self.entry_path(key);
        let parent = path.parent().expect("entry path has a parent");
        fs::create_dir_all(parent)?;
        let nonce = self.counter.fetch_add(1, Ordering::Relaxed);
        let tmp = parent.join(format!(".{key}.{}.{nonce}.tmp", std::process::id()));
        let body = serde_json::to_vec_pretty(entry).expect("cache entry serializes");
        fs::write(&tmp, body)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}
