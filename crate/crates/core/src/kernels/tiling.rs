use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the elements of one tile (a scratch-space budget).
pub const DEFAULT_TILE_BUDGET: usize = 4096;

/// Tile extents `(B_x, B_y, B_z)`, dimension 0 being `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TileConfig {
    pub bx: usize,
    pub by: usize,
    pub bz: usize,
}

impl TileConfig {
    pub const fn new_unchecked(bx: usize, by: usize, bz: usize) -> Self {
        Self { bx, by, bz }
    }

    pub fn new(bx: usize, by: usize, bz: usize) -> Result<Self> {
        Self::with_budget(bx, by, bz, usize::MAX)
    }

    pub fn with_budget(bx: usize, by: usize, bz: usize, budget: usize) -> Result<Self> {
        if bx == 0 || by == 0 || bz == 0 {
            return Err(Error::InvalidArgument(format!(
                "tile extents must be positive, got ({bx}, {by}, {bz})"
            )));
        }
        let cfg = Self { bx, by, bz };
        if cfg.volume() > budget {
            return Err(Error::InvalidArgument(format!(
                "tile ({bx}, {by}, {bz}) holds {} elements, budget is {budget}",
                cfg.volume()
            )));
        }
        Ok(cfg)
    }

    pub fn volume(&self) -> usize {
        self.bx * self.by * self.bz
    }

    /// The seven block shapes commonly used as tuning candidates.
    pub fn standard_candidates() -> Vec<TileConfig> {
        [
            (2, 2, 2),
            (4, 4, 4),
            (8, 4, 4),
            (16, 4, 4),
            (32, 4, 4),
            (64, 2, 2),
            (128, 2, 2),
        ]
        .into_iter()
        .map(|(bx, by, bz)| TileConfig::new_unchecked(bx, by, bz))
        .collect()
    }

    /// Tiles dimensions 0, 1, 2 with `(B_x, B_y, B_z)`; any further
    /// dimension is looped one index at a time.
    pub fn tiling(&self, ndims: usize) -> Tiling {
        Tiling::from_config(self, &[0, 1, 2], ndims)
    }
}

impl Default for TileConfig {
    fn default() -> Self {
        Self::new_unchecked(16, 4, 4)
    }
}

impl std::fmt::Display for TileConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.bx, self.by, self.bz)
    }
}

/// Per-dimension tile extents used by kernel traversals. Dimensions outside
/// the three tiled ones have extent 1 (outer loops).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tiling {
    extents: Vec<usize>,
}

impl Tiling {
    pub fn new(extents: Vec<usize>) -> Self {
        assert!(extents.iter().all(|&e| e > 0), "tile extents must be positive");
        Self { extents }
    }

    /// Maps `cfg`'s extents onto `tiled_dims` (in x, y, z order).
    pub fn from_config(cfg: &TileConfig, tiled_dims: &[usize], ndims: usize) -> Self {
        let mut extents = vec![1; ndims];
        for (&d, b) in tiled_dims.iter().zip([cfg.bx, cfg.by, cfg.bz]) {
            if d < ndims {
                extents[d] = b;
            }
        }
        Self { extents }
    }

    /// One tile spanning everything (untiled traversal).
    pub fn untiled(ndims: usize) -> Self {
        Self {
            extents: vec![usize::MAX; ndims],
        }
    }

    pub fn extent(&self, dim: usize) -> usize {
        self.extents.get(dim).copied().unwrap_or(usize::MAX)
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Tile start offsets covering `[lo, hi)` along `dim`.
    pub(crate) fn starts(&self, dim: usize, lo: usize, hi: usize) -> impl Iterator<Item = (usize, usize)> {
        let b = self.extent(dim).max(1);
        let mut a = lo;
        std::iter::from_fn(move || {
            if a >= hi {
                return None;
            }
            let end = a.saturating_add(b).min(hi);
            let out = (a, end);
            a = end;
            Some(out)
        })
    }

    /// Tiles covering `region`, dimension 0 varying fastest.
    pub(crate) fn tiles(&self, region: &super::Region) -> Vec<super::Region> {
        let nd = region.ndims();
        let ranges: Vec<Vec<(usize, usize)>> = (0..nd)
            .map(|d| self.starts(d, region.lo[d], region.hi[d]).collect())
            .collect();
        let counts: Vec<usize> = ranges.iter().map(|r| r.len()).collect();
        let mut out = Vec::new();
        crate::grid::for_each_index(&counts, |t| {
            let lo = (0..nd).map(|d| ranges[d][t[d]].0).collect();
            let hi = (0..nd).map(|d| ranges[d][t[d]].1).collect();
            out.push(super::Region::new(lo, hi));
        });
        out
    }
}
