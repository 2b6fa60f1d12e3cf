//! On-disk cache of walk and polygon counts.
//!
//! Each record stores the full occurrence histogram for one
//! `(lattice, kind, N, pattern)` at the origin, so every threshold `w` is
//! served by the same file.

use std::cell::Cell;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::{LatticeKind, Vertex};
use crate::saw::{count_saps, count_saws, pattern_stats, ObjectKind, Pattern, PatternStats, SearchLimits};

pub const CACHE_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "LOOPON_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".loopon-cache";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountKey {
    pub lattice: String,
    pub d: usize,
    pub kind: String,
    pub n: usize,
    pub pattern: Option<String>,
}

impl CountKey {
    pub fn new(lattice: LatticeKind, kind: ObjectKind, n: usize, pattern: Option<&Pattern>) -> Self {
        CountKey {
            lattice: lattice.name(),
            d: lattice.dim(),
            kind: kind.name().to_string(),
            n,
            pattern: pattern.map(|p| p.id().to_string()),
        }
    }

    fn file_name(&self) -> String {
        format!(
            "{}-d{}-{}-N{}-wall-{}-v{}.json",
            self.lattice,
            self.d,
            self.kind,
            self.n,
            self.pattern.as_deref().unwrap_or("none"),
            CACHE_VERSION
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub version: u32,
    pub key: CountKey,
    /// `histogram[m]` objects with exactly `m` occurrences; a single entry
    /// when no pattern is tracked.
    pub histogram: Vec<u64>,
}

/// A directory of [`CountRecord`] files, or a no-op when disabled.
#[derive(Debug)]
pub struct CountCache {
    dir: Option<PathBuf>,
    hits: Cell<u64>,
}

impl CountCache {
    /// `$LOOPON_CACHE`, falling back to `./.loopon-cache`.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        CountCache::at(dir)
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        CountCache {
            dir: Some(dir.into()),
            hits: Cell::new(0),
        }
    }

    pub fn disabled() -> Self {
        CountCache {
            dir: None,
            hits: Cell::new(0),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn hits(&self) -> u64 {
        self.hits.get()
    }

    /// A stored histogram; unreadable or stale files count as misses.
    pub fn get(&self, key: &CountKey) -> Option<Vec<u64>> {
        let path = self.dir.as_ref()?.join(key.file_name());
        let text = fs::read_to_string(path).ok()?;
        let record: CountRecord = serde_json::from_str(&text).ok()?;
        if record.version != CACHE_VERSION || &record.key != key {
            return None;
        }
        self.hits.set(self.hits.get() + 1);
        Some(record.histogram)
    }

    pub fn put(&self, key: &CountKey, histogram: &[u64]) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        fs::create_dir_all(dir)?;
        let record = CountRecord {
            version: CACHE_VERSION,
            key: key.clone(),
            histogram: histogram.to_vec(),
        };
        let path = dir.join(key.file_name());
        let tmp = dir.join(format!("{}.tmp{}", key.file_name(), std::process::id()));
        fs::write(&tmp, serde_json::to_string(&record)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    /// Pattern statistics at the origin, computed on a miss and stored.
    pub fn stats(
        &self,
        lattice: LatticeKind,
        n: usize,
        pattern: Option<&Pattern>,
        kind: ObjectKind,
        limits: SearchLimits,
    ) -> Result<PatternStats> {
        let key = CountKey::new(lattice, kind, n, pattern);
        let histogram = match self.get(&key) {
            Some(h) => h,
            None => {
                let h = fresh_histogram(lattice, n, pattern, kind, limits)?;
                self.put(&key, &h)?;
                h
            }
        };
        Ok(PatternStats {
            kind,
            n,
            total: histogram.iter().sum(),
            histogram,
        })
    }
}

/// Histogram computed without touching any cache.
pub fn fresh_histogram(
    lattice: LatticeKind,
    n: usize,
    pattern: Option<&Pattern>,
    kind: ObjectKind,
    limits: SearchLimits,
) -> Result<Vec<u64>> {
    let x = Vertex::origin(lattice.dim());
    Ok(match (pattern, kind) {
        (Some(p), _) => pattern_stats(lattice, &x, n, p, kind, limits)?.histogram,
        (None, ObjectKind::Saw) => vec![count_saws(lattice, &x, n, limits)?],
        (None, ObjectKind::Sap) => vec![count_saps(lattice, &x, n, limits)?],
    })
}
