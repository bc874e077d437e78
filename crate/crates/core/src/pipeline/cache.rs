//! Content-addressed caching of generated datasets and finished sweep
//! cells. Keys are SHA-256 digests of the serialized inputs that fully
//! determine the artifact, so a second run with an identical config
//! performs no high-fidelity solves and refits no models.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Bump to invalidate cached artifacts when their computation changes.
pub const CACHE_VERSION: u32 = 1;

/// Hex digest of the JSON serialization of `value`, prefixed with the
/// cache version.
pub fn content_key<T: Serialize>(value: &T) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(CACHE_VERSION.to_le_bytes());
    hasher.update(serde_json::to_vec(value)?);
    Ok(hex_digest(&hasher.finalize()))
}

fn hex_digest(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cache_path(dir: &Path, kind: &str, key: &str) -> PathBuf {
    dir.join(format!("{kind}-{key}.json"))
}

/// Loads the cached artifact if present, otherwise computes and stores
/// it. Returns the artifact and whether it came from the cache.
pub fn load_or_compute<T, F>(dir: &Path, kind: &str, key: &str, compute: F) -> Result<(T, bool)>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce() -> Result<T>,
{
    std::fs::create_dir_all(dir)?;
    let path = cache_path(dir, kind, key);
    if path.exists() {
        let text = std::fs::read_to_string(&path)?;
        match serde_json::from_str(&text) {
            Ok(value) => return Ok((value, true)),
            // Corrupt cache entries are recomputed, not fatal.
            Err(_) => {
                std::fs::remove_file(&path)?;
            }
        }
    }
    let value = compute()?;
    // Write through a temp file so interrupted runs never leave a
    // truncated entry behind.
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_vec(&value)?)?;
    std::fs::rename(&tmp, &path)?;
    Ok((value, false))
}
