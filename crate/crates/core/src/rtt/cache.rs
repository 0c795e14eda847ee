use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::textmetrics::normalize_nfc;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Content digest of a source text: SHA-256 over its NFC normalization, so
/// byte-different encodings of the same text share a cache entry.
pub fn source_digest(text: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(normalize_nfc(text).as_bytes());
    hasher.finalize().into()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    system: String,
    src: String,
    tgt: String,
    digest: [u8; 32],
}

#[derive(Serialize, Deserialize)]
struct LogHeader {
    format: String,
    version: u32,
    system: String,
    src: String,
    tgt: String,
}

#[derive(Serialize, Deserialize)]
struct LogEntry {
    digest: String,
    text: String,
    created_at: u64,
}

const LOG_FORMAT: &str = "rtt-qe-cache";
const LOG_VERSION: u32 = 1;

/// Persistent translation cache: one append-only JSONL log per
/// (system, source lang, target lang), with an in-memory index built at
/// open. Concurrent readers are unrestricted; writes are serialized. Write
/// failures degrade the cache to pass-through and raise a warning flag
/// rather than failing the run.
pub struct TranslationCache {
    dir: PathBuf,
    index: RwLock<HashMap<CacheKey, String>>,
    writers: Mutex<HashMap<PathBuf, File>>,
    degraded: AtomicBool,
}

fn sanitize_component(raw: &str) -> String {
    let cleaned: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '-' })
        .collect();
    cleaned.chars().take(48).collect()
}

impl TranslationCache {
    /// Open (or create) a cache directory and index every log in it.
    /// Unreadable logs and torn trailing lines are skipped with a warning
    /// instead of failing the open.
    pub fn open(dir: &Path) -> Result<TranslationCache, CacheError> {
        std::fs::create_dir_all(dir).map_err(|source| CacheError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut index = HashMap::new();
        let entries = std::fs::read_dir(dir).map_err(|source| CacheError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            let file = match File::open(&path) {
                Ok(f) => f,
                Err(err) => {
                    eprintln!("warning: cache log {} unreadable: {}", path.display(), err);
                    continue;
                }
            };
            let mut lines = BufReader::new(file).lines();
            let header: LogHeader = match lines.next() {
                Some(Ok(first)) => match serde_json::from_str(&first) {
                    Ok(h) => h,
                    Err(err) => {
                        eprintln!(
                            "warning: cache log {} has a bad header, skipping: {}",
                            path.display(),
                            err
                        );
                        continue;
                    }
                },
                _ => continue,
            };
            if header.format != LOG_FORMAT || header.version != LOG_VERSION {
                eprintln!("warning: cache log {} has an unknown format, skipping", path.display());
                continue;
            }
            for line in lines {
                let Ok(line) = line else { break };
                if line.trim().is_empty() {
                    continue;
                }
                let entry: LogEntry = match serde_json::from_str(&line) {
                    Ok(e) => e,
                    Err(_) => {
                        // Likely a torn final write; everything before it
                        // stays usable.
                        eprintln!(
                            "warning: cache log {} has an unparseable line, skipping it",
                            path.display()
                        );
                        continue;
                    }
                };
                let Ok(raw) = hex::decode(&entry.digest) else { continue };
                let Ok(digest) = <[u8; 32]>::try_from(raw.as_slice()) else { continue };
                index.insert(
                    CacheKey {
                        system: header.system.clone(),
                        src: header.src.clone(),
                        tgt: header.tgt.clone(),
                        digest,
                    },
                    entry.text,
                );
            }
        }
        Ok(TranslationCache {
            dir: dir.to_path_buf(),
            index: RwLock::new(index),
            writers: Mutex::new(HashMap::new()),
            degraded: AtomicBool::new(false),
        })
    }

    /// The log file a (system, direction) triple appends to.
    pub fn log_path(&self, system: &str, src: &str, tgt: &str) -> PathBuf {
        let mut hasher = Sha256::new();
        hasher.update(system.as_bytes());
        hasher.update([0]);
        hasher.update(src.as_bytes());
        hasher.update([0]);
        hasher.update(tgt.as_bytes());
        let digest = hasher.finalize();
        self.dir.join(format!(
            "{}__{}__{}__{}.jsonl",
            sanitize_component(system),
            sanitize_component(src),
            sanitize_component(tgt),
            hex::encode(&digest[..4])
        ))
    }

    pub fn get(&self, system: &str, src: &str, tgt: &str, text: &str) -> Option<String> {
        let key = CacheKey {
            system: system.to_string(),
            src: src.to_string(),
            tgt: tgt.to_string(),
            digest: source_digest(text),
        };
        self.index.read().unwrap().get(&key).cloned()
    }

    /// Persist (source, translation) pairs and index them. I/O failures set
    /// the degraded flag; the in-memory index is still updated so the
    /// current run keeps its results.
    pub fn put_many(&self, system: &str, src: &str, tgt: &str, pairs: &[(String, String)]) {
        if pairs.is_empty() {
            return;
        }
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut block = String::new();
        let mut keys = Vec::with_capacity(pairs.len());
        for (source, translated) in pairs {
            let digest = source_digest(source);
            let entry = LogEntry {
                digest: hex::encode(digest),
                text: translated.clone(),
                created_at,
            };
            block.push_str(&serde_json::to_string(&entry).expect("cache entry serializes"));
            block.push('\n');
            keys.push((digest, translated.clone()));
        }

        let path = self.log_path(system, src, tgt);
        {
            let mut writers = self.writers.lock().unwrap();
            let result = (|| -> std::io::Result<()> {
                if !writers.contains_key(&path) {
                    let is_new = !path.exists();
                    let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
                    if is_new || file.metadata()?.len() == 0 {
                        let header = LogHeader {
                            format: LOG_FORMAT.to_string(),
                            version: LOG_VERSION,
                            system: system.to_string(),
                            src: src.to_string(),
                            tgt: tgt.to_string(),
                        };
                        let mut line = serde_json::to_string(&header).expect("header serializes");
                        line.push('\n');
                        file.write_all(line.as_bytes())?;
                    }
                    writers.insert(path.clone(), file);
                }
                let file = writers.get_mut(&path).expect("writer present");
                file.write_all(block.as_bytes())?;
                file.flush()
            })();
            if let Err(err) = result {
                if !self.degraded.swap(true, Ordering::SeqCst) {
                    eprintln!(
                        "warning: translation cache degraded to pass-through ({}: {})",
                        path.display(),
                        err
                    );
                }
                writers.remove(&path);
            }
        }

        let mut index = self.index.write().unwrap();
        for (digest, translated) in keys {
            index.insert(
                CacheKey {
                    system: system.to_string(),
                    src: src.to_string(),
                    tgt: tgt.to_string(),
                    digest,
                },
                translated,
            );
        }
    }

    /// True once any write has failed; lookups still work but persistence
    /// is no longer guaranteed.
    pub fn degraded(&self) -> bool {
        self.degraded.load(Ordering::SeqCst)
    }

    pub fn len(&self) -> usize {
        self.index.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}
