use crate::error::{Error, Result};
use crate::grid::{hierarchical_order, GridHierarchy, TensorGrid};
use crate::kernels::{
    apply_correction, compute_coefficients, masstrans_apply, masstrans_output_region,
    solve_correction, NdBlock, OperatorSet, TileConfig, DEFAULT_TILE_BUDGET,
};
use crate::real::Real;

use super::data::RefactoredData;
use super::passes::{LevelPasses, PassCounters};
use super::spatiotemporal::{select_tiling, TilingPlan};

#[derive(Clone, Debug)]
pub struct DecomposeOptions {
    /// Caps the number of levels; `None` decomposes fully.
    pub max_levels: Option<usize>,
    /// Explicit tile shape; `None` lets [`select_tiling`] choose.
    pub tile: Option<TileConfig>,
    /// Element budget of one tile when choosing automatically.
    pub tile_budget: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            max_levels: None,
            tile: None,
            tile_budget: DEFAULT_TILE_BUDGET,
        }
    }
}

impl DecomposeOptions {
    pub fn with_levels(max_levels: Option<usize>) -> Self {
        Self {
            max_levels,
            ..Self::default()
        }
    }

    pub fn with_tile(mut self, tile: TileConfig) -> Self {
        self.tile = Some(tile);
        self
    }

    pub(crate) fn plan(&self, shape: &[usize]) -> TilingPlan {
        match self.tile {
            Some(cfg) => TilingPlan::with_config(shape.len(), cfg),
            None => select_tiling(shape.len(), shape, self.tile_budget),
        }
    }
}

/// Decomposes `grid` into `L + 1` coefficient classes. The input is not
/// modified.
pub fn decompose<T: Real>(grid: &TensorGrid<T>, levels: Option<usize>) -> Result<RefactoredData<T>> {
    decompose_with(grid, &DecomposeOptions::with_levels(levels)).map(|(r, _)| r)
}

/// [`decompose`] with explicit options, also returning the per-level pass
/// counters recorded while the kernels ran.
pub fn decompose_with<T: Real>(
    grid: &TensorGrid<T>,
    opts: &DecomposeOptions,
) -> Result<(RefactoredData<T>, PassCounters)> {
    let h = GridHierarchy::build(grid, opts.max_levels)?;
    let plan = opts.plan(grid.shape());
    decompose_hierarchy(&h, grid.values().to_vec(), &plan, false)
}

pub(crate) fn decompose_hierarchy<T: Real>(
    h: &GridHierarchy,
    values: Vec<T>,
    plan: &TilingPlan,
    fixed_axes: bool,
) -> Result<(RefactoredData<T>, PassCounters)> {
    let nlev = h.levels();
    if values.len() != h.level_len(nlev) {
        return Err(Error::Shape(format!(
            "{} values for shape {:?}",
            values.len(),
            h.shape()
        )));
    }
    let ops = OperatorSet::new(h)?;
    let mut counters = PassCounters {
        levels: Vec::with_capacity(nlev),
        full_len: values.len() as u64,
    };
    let mut classes: Vec<Vec<T>> = vec![Vec::new(); nlev + 1];
    let mut level = NdBlock::from_vec(h.level_shape(nlev), values)?;
    for l in (1..=nlev).rev() {
        let lops = ops.level(l);
        let mut lp = LevelPasses::new(l, level.len(), h.ndims());

        let region = level.region();
        compute_coefficients(&mut level, lops, &region, plan.grid_tiling())?;
        lp.coefficient += level.len() as u64;

        let order = hierarchical_order(h, l);
        let ncoarse = h.level_len(l - 1);
        let data = level.data();
        classes[l] = order[ncoarse..].iter().map(|&i| data[i]).collect();
        let mut coarse: Vec<T> = order[..ncoarse].iter().map(|&i| data[i]).collect();

        let z = correction(&level, h, l, lops, plan, Some(&mut lp))?;
        apply_correction(&mut coarse, &z, 1)?;
        lp.apply += coarse.len() as u64;

        counters.levels.push(lp);
        level = NdBlock::from_vec(h.level_shape(l - 1), coarse)?;
    }
    classes[0] = level.into_data();
    let data = RefactoredData {
        shape: h.shape().to_vec(),
        coords: h.coords().to_vec(),
        levels: nlev,
        fixed_axes,
        classes,
    };
    Ok((data, counters))
}

/// Correction `z` on `N_{l-1}` (natural order) for the coefficients held by
/// the level array: per dimension, the merged mass-transfer sweep followed by
/// the coarse mass solve. The first sweep reads the level array directly
/// with coarse nodes treated as zero.
pub(crate) fn correction<T: Real>(
    level: &NdBlock<T>,
    h: &GridHierarchy,
    l: usize,
    lops: &[crate::kernels::TridiagonalOperator],
    plan: &TilingPlan,
    mut passes: Option<&mut LevelPasses>,
) -> Result<Vec<T>> {
    let mut work: Option<NdBlock<T>> = None;
    let mut fused_pending = true;
    for d in 0..h.ndims() {
        if h.is_fixed(d, l) {
            continue;
        }
        let tiling = plan.tiling_for_dim(d);
        let src = work.as_ref().unwrap_or(level);
        let out_region = masstrans_output_region(&src.region(), &lops[d]);
        let mut f = if fused_pending && d != 0 {
            // dimension 0 is fixed: materialize the coefficient-only copy
            let masked = mask_coarse(level, lops);
            masstrans_apply(&masked, lops, d, false, &out_region, tiling)?
        } else {
            masstrans_apply(src, lops, d, fused_pending, &out_region, tiling)?
        };
        if let Some(lp) = passes.as_deref_mut() {
            if fused_pending {
                lp.copy += level.len() as u64;
            }
            lp.masstrans[d] += 2 * src.len() as u64;
        }
        fused_pending = false;
        solve_correction(&mut f, d, &lops[d], tiling)?;
        if let Some(lp) = passes.as_deref_mut() {
            lp.solve[d] += 2 * f.len() as u64;
        }
        work = Some(f);
    }
    match work {
        Some(z) => Ok(z.into_data()),
        None => Err(Error::InvalidGrid(format!("level {l} coarsens no dimension"))),
    }
}

/// Copy of `level` with every node that is coarse in all dimensions set to
/// zero. Positions are global, so `level` may be any sub-block.
pub(crate) fn mask_coarse<T: Real>(level: &NdBlock<T>, lops: &[crate::kernels::TridiagonalOperator]) -> NdBlock<T> {
    let mut out = level.clone();
    let shape = level.shape().to_vec();
    let origin = level.origin().to_vec();
    let mut k = 0;
    let data = out.data_mut();
    crate::grid::for_each_index(&shape, |idx| {
        if idx.iter().enumerate().all(|(d, &p)| lops[d].is_coarse(origin[d] + p)) {
            data[k] = T::ZERO;
        }
        k += 1;
    });
    out
}
