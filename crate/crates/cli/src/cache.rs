//! On-disk cache of computed eigen systems.
//!
//! One JSON file per deck size and artifact version. The payload is stored as
//! the exact serialized text together with its SHA-256, so corruption is
//! caught before parsing. Every hit is re-verified against the exact spectral
//! invariants; anything that fails is deleted and recomputed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use shelf_core::spectral::EigenSystem;

use crate::output::write_atomic;

/// Bumped whenever the serialized form of an eigen system changes.
pub const CACHE_VERSION: u32 = 1;

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "SHELF_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub n: usize,
    pub version: u32,
    pub checksum: String,
    pub payload: String,
}

impl CacheEntry {
    pub fn new(system: &EigenSystem) -> io::Result<Self> {
        let payload = serde_json::to_string(system).map_err(io::Error::other)?;
        Ok(Self {
            n: system.n,
            version: CACHE_VERSION,
            checksum: checksum(&payload),
            payload,
        })
    }
}

pub fn checksum(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    Hit,
    Miss,
    Evicted,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Directory from the flag, then the environment, then the per-user
    /// default (`$XDG_CACHE_HOME/shelf` or `$HOME/.cache/shelf`).
    pub fn locate(flag: Option<&Path>) -> Option<Self> {
        if let Some(dir) = flag {
            return Some(Self::new(dir));
        }
        let from_env = |key: &str| {
            std::env::var_os(key)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        };
        from_env(CACHE_DIR_ENV)
            .or_else(|| from_env("XDG_CACHE_HOME").map(|d| d.join("shelf")))
            .or_else(|| from_env("HOME").map(|d| d.join(".cache").join("shelf")))
            .map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, n: usize) -> PathBuf {
        self.dir
            .join(format!("eigensystem-v{CACHE_VERSION}-n{n}.json"))
    }

    fn evict(&self, path: &Path, reason: &str) -> (Option<EigenSystem>, Lookup) {
        eprintln!(
            "warning: discarding cache entry {}: {reason}",
            path.display()
        );
        let _ = fs::remove_file(path);
        (None, Lookup::Evicted)
    }

    /// Looks up the system for `n`; corrupt or invalid entries are evicted.
    pub fn get(&self, n: usize) -> (Option<EigenSystem>, Lookup) {
        let path = self.path_for(n);
        let Ok(text) = fs::read_to_string(&path) else {
            return (None, Lookup::Miss);
        };
        let entry: CacheEntry = match serde_json::from_str(&text) {
            Ok(e) => e,
            Err(e) => return self.evict(&path, &format!("unreadable ({e})")),
        };
        if entry.n != n || entry.version != CACHE_VERSION {
            return self.evict(&path, "key mismatch");
        }
        if checksum(&entry.payload) != entry.checksum {
            return self.evict(&path, "checksum mismatch");
        }
        let system: EigenSystem = match serde_json::from_str(&entry.payload) {
            Ok(s) => s,
            Err(e) => return self.evict(&path, &format!("bad payload ({e})")),
        };
        match system.check() {
            Ok(checks) if system.n == n && checks.all() => (Some(system), Lookup::Hit),
            _ => self.evict(&path, "spectral invariants failed"),
        }
    }

    pub fn put(&self, system: &EigenSystem) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = CacheEntry::new(system)?;
        let text = serde_json::to_string(&entry).map_err(io::Error::other)?;
        write_atomic(&self.path_for(system.n), text.as_bytes())
    }
}

/// Returns the system for `n`, from `cache` when possible. Failing to store
/// a fresh result only produces a warning.
pub fn load_or_compute(cache: Option<&Cache>, n: usize) -> shelf_core::Result<EigenSystem> {
    if let Some(cache) = cache {
        if let (Some(system), _) = cache.get(n) {
            return Ok(system);
        }
    }
    let system = EigenSystem::compute(n)?;
    if let Some(cache) = cache {
        if let Err(e) = cache.put(&system) {
            eprintln!(
                "warning: could not write cache in {}: {e}",
                cache.dir().display()
            );
        }
    }
    Ok(system)
}
