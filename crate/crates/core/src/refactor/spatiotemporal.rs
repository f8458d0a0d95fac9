use crate::error::{Error, Result};
use crate::grid::{GridHierarchy, TensorGrid, MAX_DIMS};
use crate::kernels::{TileConfig, Tiling, DEFAULT_TILE_BUDGET};
use crate::real::Real;

use super::data::RefactoredData;
use super::decompose::decompose_hierarchy;
use super::recompose::recompose_hierarchy;

/// Tile shape of one processing phase: the (up to three) tiled dimensions in
/// `x, y, z` order and the dimensions looped outside the tiles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseTiling {
    pub config: TileConfig,
    pub tiled_dims: Vec<usize>,
    pub outer_dims: Vec<usize>,
    tiling: Tiling,
}

impl PhaseTiling {
    fn new(config: TileConfig, tiled_dims: Vec<usize>, ndims: usize) -> Self {
        let outer_dims = (0..ndims).filter(|d| !tiled_dims.contains(d)).collect();
        let tiling = Tiling::from_config(&config, &tiled_dims, ndims);
        Self {
            config,
            tiled_dims,
            outer_dims,
            tiling,
        }
    }

    pub fn tiling(&self) -> &Tiling {
        &self.tiling
    }
}

/// Per-phase tiling of one decomposition. With four dimensions the last one
/// is temporal: while it is processed the tiles cover `{0, 1, t}` and
/// dimension 2 becomes an outer loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingPlan {
    pub spatial: PhaseTiling,
    pub temporal: Option<(usize, PhaseTiling)>,
}

impl TilingPlan {
    /// Uses `cfg` for every phase, unclipped.
    pub fn with_config(ndims: usize, cfg: TileConfig) -> Self {
        let spatial = PhaseTiling::new(cfg, (0..ndims.min(3)).collect(), ndims);
        let temporal = (ndims == 4).then(|| (3, PhaseTiling::new(cfg, vec![0, 1, 3], ndims)));
        Self { spatial, temporal }
    }

    /// Tiling for the coefficient kernel and for sweeps along spatial
    /// dimensions.
    pub fn grid_tiling(&self) -> &Tiling {
        self.spatial.tiling()
    }

    pub fn phase(&self, dim: usize) -> &PhaseTiling {
        match &self.temporal {
            Some((t, p)) if *t == dim => p,
            _ => &self.spatial,
        }
    }

    pub fn tiling_for_dim(&self, dim: usize) -> &Tiling {
        self.phase(dim).tiling()
    }
}

/// Chooses the tiled dimensions and tile extents of each phase. Extents
/// start from the default tile, are clipped to the grid and then halved
/// (largest first) until a tile holds at most `budget` elements.
pub fn select_tiling(ndims: usize, shape: &[usize], budget: usize) -> TilingPlan {
    let fit = |dims: &[usize]| -> TileConfig {
        let base = TileConfig::default();
        let mut ext = [base.bx, base.by, base.bz];
        for (i, e) in ext.iter_mut().enumerate() {
            *e = match dims.get(i) {
                Some(&d) => (*e).min(shape.get(d).copied().unwrap_or(1)).max(1),
                None => 1,
            };
        }
        while ext.iter().product::<usize>() > budget.max(1) {
            let i = (0..3).max_by_key(|&i| (ext[i], std::cmp::Reverse(i))).unwrap();
            ext[i] = (ext[i] / 2).max(1);
        }
        TileConfig::new_unchecked(ext[0], ext[1], ext[2])
    };
    let tiled: Vec<usize> = (0..ndims.min(3)).collect();
    let spatial = PhaseTiling::new(fit(&tiled), tiled, ndims);
    let temporal = (ndims == 4).then(|| {
        let dims = vec![0, 1, 3];
        (3, PhaseTiling::new(fit(&dims), dims, ndims))
    });
    TilingPlan { spatial, temporal }
}

/// Refactors a time series as one grid with time as the last (slowest)
/// dimension, so each level processes the spatial dimensions before time.
/// Two snapshots are allowed; the time axis is then never coarsened.
pub fn decompose_spatiotemporal<T: Real>(
    snapshots: &[TensorGrid<T>],
    time_coords: &[f64],
    levels: Option<usize>,
) -> Result<RefactoredData<T>> {
    let first = snapshots
        .first()
        .ok_or_else(|| Error::InvalidArgument("no snapshots given".into()))?;
    if snapshots.len() < 2 {
        return Err(Error::InvalidArgument("at least 2 snapshots are required".into()));
    }
    if time_coords.len() != snapshots.len() {
        return Err(Error::Shape(format!(
            "{} time coordinates for {} snapshots",
            time_coords.len(),
            snapshots.len()
        )));
    }
    if first.ndims() + 1 > MAX_DIMS {
        return Err(Error::InvalidGrid(format!(
            "{}-D snapshots leave no room for a time axis",
            first.ndims()
        )));
    }
    for (i, s) in snapshots.iter().enumerate() {
        if s.shape() != first.shape() || s.coords() != first.coords() {
            return Err(Error::Shape(format!(
                "snapshot {i} has shape {:?}, snapshot 0 has {:?}",
                s.shape(),
                first.shape()
            )));
        }
    }
    let mut shape = first.shape().to_vec();
    shape.push(snapshots.len());
    let mut coords = first.coords().to_vec();
    coords.push(time_coords.to_vec());
    let fixed = snapshots.len() < 3;
    let h = if fixed {
        GridHierarchy::with_fixed_axes(&shape, &coords, levels)?
    } else {
        GridHierarchy::new(&shape, &coords, levels)?
    };
    let values: Vec<T> = snapshots.iter().flat_map(|s| s.values().iter().copied()).collect();
    let plan = select_tiling(shape.len(), &shape, DEFAULT_TILE_BUDGET);
    decompose_hierarchy(&h, values, &plan, fixed).map(|(r, _)| r)
}

/// Inverse of [`decompose_spatiotemporal`] using classes `0..=k`; returns
/// one grid per time step.
pub fn recompose_spatiotemporal<T: Real>(
    data: &RefactoredData<T>,
    classes_used: Option<usize>,
) -> Result<Vec<TensorGrid<T>>> {
    let h = data.hierarchy()?;
    let nd = h.ndims();
    if nd < 2 {
        return Err(Error::InvalidGrid("no spatial dimensions before the time axis".into()));
    }
    let plan = select_tiling(nd, h.shape(), DEFAULT_TILE_BUDGET);
    let values = recompose_hierarchy(&h, data, classes_used, &plan)?;
    let spatial_shape = h.shape()[..nd - 1].to_vec();
    let spatial_coords = h.coords()[..nd - 1].to_vec();
    let n: usize = spatial_shape.iter().product();
    values
        .chunks(n)
        .map(|c| TensorGrid::new(spatial_shape.clone(), spatial_coords.clone(), c.to_vec()))
        .collect()
}
