//! On-disk cache of enumerated Göpel groups.
//!
//! One file per `(g, r)`. The first line is a header
//! `hyperrho-goepel v<FORMAT_VERSION> g=<g> r=<r> count=<n>`; each further
//! line is one group as its element indices in ascending order, hex-encoded
//! and space-separated.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::charkit::Characteristic;
use crate::error::{Error, Result};

use super::{enumerate_groups, GoepelGroup};

pub const FORMAT_VERSION: u32 = 1;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "HYPERRHO_CACHE_DIR";

#[derive(Clone, Debug)]
pub struct GroupCache {
    dir: PathBuf,
}

/// Where a group list came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Hit,
    Miss,
    Disabled,
}

impl GroupCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// `$HYPERRHO_CACHE_DIR`, or `hyperrho-cache` under the system temp dir.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::new(std::env::temp_dir().join("hyperrho-cache")),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, g: usize, r: usize) -> PathBuf {
        self.dir.join(format!("goepel-g{g}-r{r}.txt"))
    }

    fn header(g: usize, r: usize, n: usize) -> String {
        format!("hyperrho-goepel v{FORMAT_VERSION} g={g} r={r} count={n}")
    }

    /// `Ok(None)` when the file is absent or written by another format
    /// version; `Err` when it is present but malformed.
    pub fn load(&self, g: usize, r: usize) -> Result<Option<Vec<GoepelGroup>>> {
        let path = self.path(g, r);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        let mut fields = header.split_whitespace();
        if fields.next() != Some("hyperrho-goepel") {
            return Err(Error::Cache(format!("{}: not a group cache", path.display())));
        }
        if fields.next() != Some(format!("v{FORMAT_VERSION}").as_str()) {
            return Ok(None);
        }
        let count: usize = header
            .rsplit_once("count=")
            .and_then(|(_, n)| n.trim().parse().ok())
            .ok_or_else(|| Error::Cache(format!("{}: bad header", path.display())))?;
        if !header.starts_with(&Self::header(g, r, count)) {
            return Err(Error::Cache(format!("{}: header is for another (g, r)", path.display())));
        }
        let mut groups = Vec::with_capacity(count);
        for (n, line) in lines.enumerate() {
            let elements = line
                .split_whitespace()
                .map(|h| {
                    let idx = usize::from_str_radix(h, 16)
                        .map_err(|_| Error::Cache(format!("line {}: bad hex {h:?}", n + 2)))?;
                    Characteristic::from_index(g, idx).map_err(|e| Error::Cache(format!("line {}: {e}", n + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            if elements.len() != 1 << r {
                return Err(Error::Cache(format!("line {}: {} elements", n + 2, elements.len())));
            }
            let grp =
                GoepelGroup::from_elements(g, &elements).map_err(|e| Error::Cache(format!("line {}: {e}", n + 2)))?;
            groups.push(grp);
        }
        if groups.len() != count {
            return Err(Error::Cache(format!("expected {count} groups, found {}", groups.len())));
        }
        Ok(Some(groups))
    }

    /// Writes via a temporary file and rename.
    pub fn store(&self, g: usize, r: usize, groups: &[GoepelGroup]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(g, r);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
            writeln!(f, "{}", Self::header(g, r, groups.len()))?;
            for grp in groups {
                let mut idx: Vec<usize> = grp.elements().iter().map(|c| c.index()).collect();
                idx.sort_unstable();
                let line: Vec<String> = idx.iter().map(|i| format!("{i:x}")).collect();
                writeln!(f, "{}", line.join(" "))?;
            }
            f.flush()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Loads from the cache, enumerating and storing on a miss. A malformed
    /// cache file is replaced.
    pub fn groups(&self, g: usize, r: usize) -> Result<(Vec<GoepelGroup>, CacheStatus)> {
        if let Ok(Some(groups)) = self.load(g, r) {
            return Ok((groups, CacheStatus::Hit));
        }
        let groups = enumerate_groups(g, r)?;
        self.store(g, r, &groups)?;
        Ok((groups, CacheStatus::Miss))
    }
}

/// Enumerates through `cache` when given, directly otherwise.
pub fn groups_with_cache(g: usize, r: usize, cache: Option<&GroupCache>) -> Result<(Vec<GoepelGroup>, CacheStatus)> {
    match cache {
        Some(c) => c.groups(g, r),
        None => Ok((enumerate_groups(g, r)?, CacheStatus::Disabled)),
    }
}
