use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::kernels::TileConfig;
use crate::real::Precision;

use super::model::Kernel;

/// Environment variable naming the tuning cache directory.
pub const TUNE_DIR_ENV: &str = "MGREFACTOR_TUNE_DIR";
const FILE_NAME: &str = "tuning.txt";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TuneKey {
    pub kernel: Kernel,
    pub n: usize,
    pub precision: Precision,
}

/// Tuned configurations keyed by kernel, size and precision, optionally
/// persisted as `GPK 257 f64 = 32x4x4` lines.
#[derive(Debug, Default)]
pub struct TuneCache {
    dir: Option<PathBuf>,
    entries: RwLock<BTreeMap<TuneKey, TileConfig>>,
}

impl TuneCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or starts) the cache file in `dir`.
    pub fn with_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let path = dir.join(FILE_NAME);
        let entries = match std::fs::read_to_string(&path) {
            Ok(text) => parse(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            dir: Some(dir),
            entries: RwLock::new(entries),
        })
    }

    /// Uses the directory in `MGREFACTOR_TUNE_DIR`, or memory only when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(TUNE_DIR_ENV) {
            Some(d) if !d.is_empty() => Self::with_dir(d),
            _ => Ok(Self::in_memory()),
        }
    }

    pub fn path(&self) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(FILE_NAME))
    }

    pub fn get(&self, key: &TuneKey) -> Option<TileConfig> {
        self.entries.read().expect("tuning cache lock").get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("tuning cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Records `cfg` and rewrites the file when the cache is persistent.
    pub fn insert(&self, key: TuneKey, cfg: TileConfig) -> Result<()> {
        let mut map = self.entries.write().expect("tuning cache lock");
        map.insert(key, cfg);
        if let Some(dir) = &self.dir {
            std::fs::create_dir_all(dir)?;
            let text: String = map
                .iter()
                .map(|(k, c)| format!("{} {} {} = {}\n", k.kernel, k.n, k.precision.name(), c))
                .collect();
            let tmp = dir.join(format!("{FILE_NAME}.tmp"));
            std::fs::write(&tmp, text)?;
            std::fs::rename(tmp, dir.join(FILE_NAME))?;
        }
        Ok(())
    }
}

fn parse(text: &str) -> Result<BTreeMap<TuneKey, TileConfig>> {
    let bad = |line: &str| Error::InvalidArgument(format!("malformed tuning cache line `{line}`"));
    let mut out = BTreeMap::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (lhs, rhs) = line.split_once('=').ok_or_else(|| bad(line))?;
        let key: Vec<&str> = lhs.split_whitespace().collect();
        let [kernel, n, precision] = key[..] else {
            return Err(bad(line));
        };
        let ext: Vec<usize> = rhs
            .trim()
            .split('x')
            .map(|v| v.parse().map_err(|_| bad(line)))
            .collect::<Result<_>>()?;
        let [bx, by, bz] = ext[..] else {
            return Err(bad(line));
        };
        let key = TuneKey {
            kernel: kernel.parse().map_err(|_| bad(line))?,
            n: n.parse().map_err(|_| bad(line))?,
            precision: precision.parse().map_err(|_| bad(line))?,
        };
        out.insert(key, TileConfig::new(bx, by, bz)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let m = parse("# tuned\nGPK 257 f64 = 32x4x4\nipk 9 f32 = 4x4x4\n").unwrap();
        assert_eq!(m.len(), 2);
        let k = TuneKey {
            kernel: Kernel::Ipk,
            n: 9,
            precision: Precision::F32,
        };
        assert_eq!(m[&k], TileConfig::new_unchecked(4, 4, 4));
        assert!(parse("GPK 257 = 1x1x1").is_err());
        assert!(parse("GPK 257 f64 = 1x0x1").is_err());
    }
}
