//! Content-addressed response cache: one file per request key, named by the
//! SHA-256 of the key. Entries never expire.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// A cached upstream answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CachedResponse {
    Found(Vec<u8>),
    NotFound,
}

const FOUND_TAG: &[u8] = b"200\n";
const NOT_FOUND_TAG: &[u8] = b"404\n";

#[derive(Clone, Debug)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DiskCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        let digest = Sha256::digest(key.as_bytes());
        let name: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(name)
    }

    pub fn get(&self, key: &str) -> Option<CachedResponse> {
        let bytes = fs::read(self.path_for(key)).ok()?;
        if let Some(body) = bytes.strip_prefix(FOUND_TAG) {
            Some(CachedResponse::Found(body.to_vec()))
        } else if bytes == NOT_FOUND_TAG {
            Some(CachedResponse::NotFound)
        } else {
            log::warn!("ignoring unreadable cache entry for {key}");
            None
        }
    }

    /// Write atomically: temp file in the cache directory, then rename.
    pub fn put(&self, key: &str, response: &CachedResponse) -> io::Result<()> {
        let path = self.path_for(key);
        let mut tmp = tempfile_in(&self.dir)?;
        match response {
            CachedResponse::Found(body) => {
                tmp.1.write_all(FOUND_TAG)?;
                tmp.1.write_all(body)?;
            }
            CachedResponse::NotFound => tmp.1.write_all(NOT_FOUND_TAG)?,
        }
        tmp.1.sync_all()?;
        fs::rename(&tmp.0, path)
    }
}

fn tempfile_in(dir: &Path) -> io::Result<(PathBuf, fs::File)> {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let path = dir.join(format!(".tmp-{}-{n}", std::process::id()));
    let file = fs::File::create(&path)?;
    Ok((path, file))
}
