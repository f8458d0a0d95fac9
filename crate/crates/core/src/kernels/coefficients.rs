use crate::error::{Error, Result};
use crate::real::Real;

use super::block::{NdBlock, Region};
use super::operator::{NodeKind, TridiagonalOperator};
use super::tiling::Tiling;

/// Per-dimension interpolation stencil of every fine position.
struct Axis<T> {
    // fine position of the left/right coarse neighbour; equal to p for coarse nodes
    left: Vec<usize>,
    right: Vec<usize>,
    weight: Vec<T>,
    coarse: Vec<bool>,
}

impl<T: Real> Axis<T> {
    fn new(op: &TridiagonalOperator) -> Self {
        let n = op.fine_len();
        let mut axis = Axis {
            left: Vec::with_capacity(n),
            right: Vec::with_capacity(n),
            weight: Vec::with_capacity(n),
            coarse: Vec::with_capacity(n),
        };
        let cp = op.coarse_positions();
        for p in 0..n {
            match op.kind(p) {
                NodeKind::Coarse(_) => {
                    axis.left.push(p);
                    axis.right.push(p);
                    axis.weight.push(T::ZERO);
                    axis.coarse.push(true);
                }
                NodeKind::Between { left, weight } => {
                    axis.left.push(cp[left]);
                    axis.right.push(cp[left + 1]);
                    axis.weight.push(T::from_f64(weight));
                    axis.coarse.push(false);
                }
            }
        }
        axis
    }
}

#[derive(Clone, Copy)]
enum Mode {
    Compute,
    Restore,
}

/// Replaces every coefficient node of `region` by its value minus the
/// multilinear interpolation of the surrounding coarse nodes. Coarse nodes
/// are left untouched; `block` must also hold the coarse neighbours of the
/// region's nodes (its ghost layer).
pub fn compute_coefficients<T: Real>(
    block: &mut NdBlock<T>,
    ops: &[TridiagonalOperator],
    region: &Region,
    tiling: &Tiling,
) -> Result<()> {
    run(block, ops, region, tiling, Mode::Compute)
}

/// Inverse of [`compute_coefficients`]: adds the interpolation of the coarse
/// nodes back onto every coefficient node of `region`.
pub fn restore_coefficients<T: Real>(
    block: &mut NdBlock<T>,
    ops: &[TridiagonalOperator],
    region: &Region,
    tiling: &Tiling,
) -> Result<()> {
    run(block, ops, region, tiling, Mode::Restore)
}

fn run<T: Real>(
    block: &mut NdBlock<T>,
    ops: &[TridiagonalOperator],
    region: &Region,
    tiling: &Tiling,
    mode: Mode,
) -> Result<()> {
    let nd = block.ndims();
    if ops.len() != nd || region.ndims() != nd {
        return Err(Error::Shape(format!(
            "{} operators and a {}-D region for a {nd}-D block",
            ops.len(),
            region.ndims()
        )));
    }
    if region.is_empty() {
        return Ok(());
    }
    let axes: Vec<Axis<T>> = ops.iter().map(Axis::new).collect();
    let bregion = block.region();
    for d in 0..nd {
        if region.hi[d] > ops[d].fine_len() {
            return Err(Error::Shape(format!(
                "region reaches position {} along dimension {d} of a {}-node level",
                region.hi[d],
                ops[d].fine_len()
            )));
        }
        let need_lo = axes[d].left[region.lo[d]];
        let need_hi = axes[d].right[region.hi[d] - 1] + 1;
        if need_lo < bregion.lo[d] || need_hi > bregion.hi[d] {
            return Err(Error::Shape(format!(
                "block {bregion:?} lacks the interpolation halo [{need_lo}, {need_hi}) along dimension {d}"
            )));
        }
    }

    // Tiles partition the region; a coefficient node belongs to the tile
    // holding the lower corner of its interpolation cell, so tiles also
    // produce the coefficients of their upper ghost layer.
    let owner = |d: usize, p: usize| axes[d].left[p].max(region.lo[d]);
    let tile_ranges: Vec<Vec<(usize, usize)>> = (0..nd)
        .map(|d| tiling.starts(d, region.lo[d], region.hi[d]).collect())
        .collect();
    let mut tile = vec![0usize; nd];
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); nd];
    let mut pos = vec![0usize; nd];
    let mut cursor = vec![0usize; nd];
    loop {
        for d in 0..nd {
            let (a, b) = tile_ranges[d][tile[d]];
            candidates[d].clear();
            let end = (b + 1).min(region.hi[d]);
            candidates[d].extend((a..end).filter(|&p| {
                let o = owner(d, p);
                a <= o && o < b
            }));
        }
        if candidates.iter().all(|c| !c.is_empty()) {
            cursor.iter_mut().for_each(|c| *c = 0);
            'nodes: loop {
                for d in 0..nd {
                    pos[d] = candidates[d][cursor[d]];
                }
                if !(0..nd).all(|d| axes[d].coarse[pos[d]]) {
                    let interp = interpolate(block, &axes, &pos);
                    let o = block.offset(&pos);
                    let v = block.data()[o];
                    block.data_mut()[o] = match mode {
                        Mode::Compute => v - interp,
                        Mode::Restore => interp + v,
                    };
                }
                let mut d = 0;
                loop {
                    if d == nd {
                        break 'nodes;
                    }
                    cursor[d] += 1;
                    if cursor[d] < candidates[d].len() {
                        break;
                    }
                    cursor[d] = 0;
                    d += 1;
                }
            }
        }
        let mut d = 0;
        loop {
            if d == nd {
                return Ok(());
            }
            tile[d] += 1;
            if tile[d] < tile_ranges[d].len() {
                break;
            }
            tile[d] = 0;
            d += 1;
        }
    }
}

/// Multilinear interpolation at `pos` from the corners of its coarse cell,
/// reduced along fine dimensions in ascending order.
#[inline]
fn interpolate<T: Real>(block: &NdBlock<T>, axes: &[Axis<T>], pos: &[usize]) -> T {
    let nd = pos.len();
    let mut fine = [0usize; 4];
    let mut k = 0;
    for d in 0..nd {
        if !axes[d].coarse[pos[d]] {
            fine[k] = d;
            k += 1;
        }
    }
    let mut corner = [0usize; 4];
    corner[..nd].copy_from_slice(pos);
    let mut vals = [T::ZERO; 16];
    for (c, val) in vals.iter_mut().enumerate().take(1 << k) {
        for (i, &d) in fine[..k].iter().enumerate() {
            corner[d] = if c & (1 << i) == 0 {
                axes[d].left[pos[d]]
            } else {
                axes[d].right[pos[d]]
            };
        }
        *val = block.get(&corner[..nd]);
    }
    for (i, &d) in fine[..k].iter().enumerate() {
        let step = 1 << i;
        let w = axes[d].weight[pos[d]];
        let mut c = 0;
        while c < (1 << k) {
            vals[c] = vals[c] + w * (vals[c + step] - vals[c]);
            c += 2 * step;
        }
    }
    vals[0]
}
