use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{hierarchical_order, GridHierarchy, TensorGrid};
use crate::kernels::{apply_correction, restore_coefficients, NdBlock, OperatorSet};
use crate::real::Real;

use super::data::{ErrorMetrics, RefactoredData, ReconstructionReport};
use super::decompose::correction;
use super::spatiotemporal::{select_tiling, TilingPlan};

/// Rebuilds the grid from class 0 and the coefficient classes `1..=k`
/// (`k = L` when `None`). Classes past `k` are treated as zero.
pub fn recompose<T: Real>(
    data: &RefactoredData<T>,
    classes_used: Option<usize>,
) -> Result<(TensorGrid<T>, ReconstructionReport)> {
    recompose_with_report(data, classes_used, None)
}

/// Like [`recompose`], measuring the errors against `reference` when given.
pub fn recompose_with_report<T: Real>(
    data: &RefactoredData<T>,
    classes_used: Option<usize>,
    reference: Option<&TensorGrid<T>>,
) -> Result<(TensorGrid<T>, ReconstructionReport)> {
    let start = Instant::now();
    let k = classes_used.unwrap_or(data.levels());
    let values = recompose_values(data, Some(k))?;
    let elapsed_secs = start.elapsed().as_secs_f64();
    let errors = reference
        .map(|r| ErrorMetrics::between(r, &values))
        .transpose()?;
    let grid = TensorGrid::new(data.shape().to_vec(), data.coords().to_vec(), values)?;
    Ok((
        grid,
        ReconstructionReport {
            classes_used: k,
            errors,
            elapsed_secs,
        },
    ))
}

/// Full-resolution values (natural order) recomposed from classes `0..=k`.
pub fn recompose_values<T: Real>(data: &RefactoredData<T>, classes_used: Option<usize>) -> Result<Vec<T>> {
    let h = data.hierarchy()?;
    let plan = select_tiling(h.ndims(), h.shape(), crate::kernels::DEFAULT_TILE_BUDGET);
    recompose_hierarchy(&h, data, classes_used, &plan)
}

pub(crate) fn recompose_hierarchy<T: Real>(
    h: &GridHierarchy,
    data: &RefactoredData<T>,
    classes_used: Option<usize>,
    plan: &TilingPlan,
) -> Result<Vec<T>> {
    let nlev = h.levels();
    let k = classes_used.unwrap_or(nlev);
    if k > nlev {
        return Err(Error::InvalidLevel {
            level: k,
            expected: format!("0..={nlev} classes"),
        });
    }
    if data.classes_available() <= k {
        return Err(Error::MissingClass {
            requested: k,
            available: data.classes_available(),
        });
    }
    let ops = OperatorSet::new(h)?;
    let mut coarse = data.classes[0].clone();
    for l in 1..=nlev {
        let lops = ops.level(l);
        let shape = h.level_shape(l);
        let order = hierarchical_order(h, l);
        let ncoarse = h.level_len(l - 1);
        let mut level = NdBlock::zeros(&crate::kernels::Region::full(&shape));
        if l <= k {
            let buf = level.data_mut();
            for (&i, &c) in order[ncoarse..].iter().zip(&data.classes[l]) {
                buf[i] = c;
            }
            let z = correction(&level, h, l, lops, plan, None)?;
            apply_correction(&mut coarse, &z, -1)?;
        }
        let buf = level.data_mut();
        for (&i, &c) in order[..ncoarse].iter().zip(&coarse) {
            buf[i] = c;
        }
        let region = level.region();
        restore_coefficients(&mut level, lops, &region, plan.grid_tiling())?;
        coarse = level.into_data();
    }
    Ok(coarse)
}
