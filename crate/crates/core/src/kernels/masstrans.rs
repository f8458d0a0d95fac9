use crate::error::{Error, Result};
use crate::grid::for_each_index;
use crate::real::Real;

use super::block::{NdBlock, Region};
use super::operator::{NodeKind, TridiagonalOperator};
use super::tiling::Tiling;

/// Output box of [`masstrans_apply`] for a fine-lattice input box: the
/// coarse indices along `op.dim()` whose fine positions lie inside `input`.
pub fn masstrans_output_region(input: &Region, op: &TridiagonalOperator) -> Region {
    let d = op.dim();
    let (lo, hi) = op.coarse_range(input.lo[d], input.hi[d]);
    let mut out = input.clone();
    out.lo[d] = lo;
    out.hi[d] = hi;
    out
}

/// Applies the transfer matrix after the mass matrix along `dim`,
/// out-of-place, producing the load contributions on the coarse positions
/// of `out_region`.
///
/// Each output is the transfer-weighted sum of the mass stencil at the
/// aligned fine node and its non-coarse neighbours, so a row reads fine
/// positions `p-2..=p+2`. With `fused_copy` (dimension 0 only) the input is
/// the level array itself: nodes coarse in every dimension are read as zero,
/// which builds the coefficient-only vector in the same pass instead of
/// copying it into a workspace first.
pub fn masstrans_apply<T: Real>(
    src: &NdBlock<T>,
    ops: &[TridiagonalOperator],
    dim: usize,
    fused_copy: bool,
    out_region: &Region,
    tiling: &Tiling,
) -> Result<NdBlock<T>> {
    let nd = src.ndims();
    if dim >= nd || ops.len() != nd || out_region.ndims() != nd {
        return Err(Error::Shape(format!(
            "dimension {dim} with {} operators on a {nd}-D block",
            ops.len()
        )));
    }
    if fused_copy && dim != 0 {
        return Err(Error::InvalidFusion(dim));
    }
    let op = &ops[dim];
    let mut out = NdBlock::zeros(out_region);
    if out_region.is_empty() {
        return Ok(out);
    }
    let sreg = src.region();
    let m = op.fine_len();
    if out_region.hi[dim] > op.coarse_len() {
        return Err(Error::Shape(format!(
            "output reaches coarse index {} of {} along dimension {dim}",
            out_region.hi[dim],
            op.coarse_len()
        )));
    }
    let cp = op.coarse_positions();
    let need_lo = cp[out_region.lo[dim]].saturating_sub(2);
    let need_hi = (cp[out_region.hi[dim] - 1] + 3).min(m);
    for d in 0..nd {
        let (lo, hi) = if d == dim {
            (need_lo, need_hi)
        } else {
            (out_region.lo[d], out_region.hi[d])
        };
        if lo < sreg.lo[d] || hi > sreg.hi[d] {
            return Err(Error::Shape(format!(
                "input block {sreg:?} lacks positions [{lo}, {hi}) along dimension {d}"
            )));
        }
    }

    let diag: Vec<T> = op.fine_mass().diag.iter().map(|&v| T::from_f64(v)).collect();
    let off: Vec<T> = op.fine_mass().off.iter().map(|&v| T::from_f64(v)).collect();
    // transfer weight of a fine node toward the coarse node on its right / left
    let mut to_right = vec![None; m];
    let mut to_left = vec![None; m];
    let mut coarse_along = vec![false; m];
    for (p, k) in op.kinds().iter().enumerate() {
        match *k {
            NodeKind::Coarse(_) => coarse_along[p] = true,
            NodeKind::Between { weight, .. } => {
                to_right[p] = Some(T::from_f64(weight));
                to_left[p] = Some(T::from_f64(1.0 - weight));
            }
        }
    }

    let sd = src.strides()[dim];
    let data = src.data();
    let mut pos = vec![0usize; nd];
    for tile in tiling.tiles(out_region) {
        let tshape = tile.shape();
        for_each_index(&tshape, |idx| {
            for d in 0..nd {
                pos[d] = tile.lo[d] + idx[d];
            }
            let i = pos[dim];
            let p = cp[i];
            let masked = fused_copy
                && (0..nd).all(|e| e == dim || ops[e].is_coarse(pos[e]));
            pos[dim] = sreg.lo[dim];
            let base = src.offset(&pos);
            pos[dim] = i;
            let c = |j: usize| -> T {
                if masked && coarse_along[j] {
                    T::ZERO
                } else {
                    data[base + (j - sreg.lo[dim]) * sd]
                }
            };
            let mass = |j: usize| -> T {
                let mut s = diag[j] * c(j);
                if j > 0 {
                    s = off[j - 1] * c(j - 1) + s;
                }
                if j + 1 < m {
                    s += off[j] * c(j + 1);
                }
                s
            };
            let mut f = mass(p);
            if p > 0 {
                if let Some(w) = to_right[p - 1] {
                    f = w * mass(p - 1) + f;
                }
            }
            if p + 1 < m {
                if let Some(w) = to_left[p + 1] {
                    f += w * mass(p + 1);
                }
            }
            let o = out.offset(&pos);
            out.data_mut()[o] = f;
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{uniform_coords, GridHierarchy};
    use crate::kernels::OperatorSet;

    #[test]
    fn three_node_example() {
        let coords = vec![vec![0.0, 1.0, 2.0]];
        let h = GridHierarchy::new(&[3], &coords, None).unwrap();
        let ops = OperatorSet::new(&h).unwrap();
        let c = 1.5;
        let src = NdBlock::from_vec(vec![3], vec![0.0, c, 0.0]).unwrap();
        let out_r = masstrans_output_region(&src.region(), &ops.level(1)[0]);
        let f = masstrans_apply(&src, ops.level(1), 0, false, &out_r, &Tiling::untiled(1)).unwrap();
        // M·c = (c, 4c, c); R rows (1, 0.5, 0) and (0, 0.5, 1)
        assert_eq!(f.data(), &[3.0 * c, 3.0 * c]);
    }

    #[test]
    fn fused_masks_coarse_nodes() {
        let coords = vec![uniform_coords(5), uniform_coords(5)];
        let h = GridHierarchy::new(&[5, 5], &coords, Some(1)).unwrap();
        let ops = OperatorSet::new(&h).unwrap();
        let vals: Vec<f64> = (0..25).map(|i| (i * 7 % 11) as f64).collect();
        let raw = NdBlock::from_vec(vec![5, 5], vals.clone()).unwrap();
        let mut zeroed = vals;
        for j in [0, 2, 4] {
            for i in [0, 2, 4] {
                zeroed[i + 5 * j] = 0.0;
            }
        }
        let zeroed = NdBlock::from_vec(vec![5, 5], zeroed).unwrap();
        let out_r = masstrans_output_region(&raw.region(), &ops.level(1)[0]);
        let t = Tiling::untiled(2);
        let a = masstrans_apply(&raw, ops.level(1), 0, true, &out_r, &t).unwrap();
        let b = masstrans_apply(&zeroed, ops.level(1), 0, false, &out_r, &t).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            masstrans_apply(&raw, ops.level(1), 1, true, &out_r, &t),
            Err(Error::InvalidFusion(1))
        ));
    }
}
