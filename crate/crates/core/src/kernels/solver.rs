use crate::error::{Error, Result};
use crate::grid::for_each_index;
use crate::real::Real;

use super::block::{NdBlock, Region};
use super::operator::TridiagonalOperator;
use super::tiling::Tiling;

/// Solves `M_{l-1} z = f` along `dim` for every fiber of `block` in place.
/// The block must span the whole coarse extent along `dim`.
pub fn solve_correction<T: Real>(
    block: &mut NdBlock<T>,
    dim: usize,
    op: &TridiagonalOperator,
    tiling: &Tiling,
) -> Result<()> {
    let n = op.coarse_len();
    if block.origin()[dim] != 0 || block.shape()[dim] != n {
        return Err(Error::Shape(format!(
            "solve along dimension {dim} needs all {n} coarse positions, block covers {:?}",
            block.region()
        )));
    }
    forward_sweep(block, dim, op, None, tiling)?;
    backward_sweep(block, dim, op, None, tiling)?;
    Ok(())
}

/// Fibers of `block` along `dim` grouped by transverse tile:
/// `(fiber id, offset of the fiber's first local element)`.
fn fiber_batches<T: Copy + Default>(
    block: &NdBlock<T>,
    dim: usize,
    tiling: &Tiling,
) -> Vec<Vec<(usize, usize)>> {
    let mut tshape = block.shape().to_vec();
    tshape[dim] = 1;
    let tstrides = crate::grid::strides(&tshape);
    let bstrides = block.strides();
    tiling
        .tiles(&Region::full(&tshape))
        .into_iter()
        .map(|tile| {
            let mut batch = Vec::with_capacity(tile.len());
            for_each_index(&tile.shape(), |idx| {
                let mut id = 0;
                let mut off = 0;
                for d in 0..idx.len() {
                    let p = tile.lo[d] + idx[d];
                    id += p * tstrides[d];
                    off += p * bstrides[d];
                }
                batch.push((id, off));
            });
            batch
        })
        .collect()
}

fn fiber_count<T: Copy + Default>(block: &NdBlock<T>, dim: usize) -> usize {
    block
        .shape()
        .iter()
        .enumerate()
        .filter(|&(d, _)| d != dim)
        .map(|(_, &n)| n)
        .product()
}

fn check_carry<T>(carry: Option<&[T]>, fibers: usize, needed: bool, what: &str) -> Result<()> {
    match (carry, needed) {
        (None, true) => Err(Error::Shape(format!("{what} sweep needs a carry from its neighbour"))),
        (Some(_), false) => Err(Error::Shape(format!(
            "{what} sweep starts at the boundary and takes no carry"
        ))),
        (Some(c), true) if c.len() != fibers => Err(Error::Shape(format!(
            "carry of {} values for {fibers} fibers",
            c.len()
        ))),
        _ => Ok(()),
    }
}

/// Forward substitution `v_i += fwd_i · v_{i-1}` over the block's segment of
/// each fiber. `carry` holds the last forward value of every fiber from the
/// preceding segment (absent when the block starts at position 0). Returns
/// the carry for the next segment; an empty segment passes `carry` through.
pub fn forward_sweep<T: Real>(
    block: &mut NdBlock<T>,
    dim: usize,
    op: &TridiagonalOperator,
    carry: Option<&[T]>,
    tiling: &Tiling,
) -> Result<Option<Vec<T>>> {
    let len = block.shape()[dim];
    if len == 0 {
        return Ok(carry.map(|c| c.to_vec()));
    }
    let start = block.origin()[dim];
    if start + len > op.coarse_len() {
        return Err(Error::Shape(format!(
            "segment [{start}, {}) exceeds {} coarse positions",
            start + len,
            op.coarse_len()
        )));
    }
    let fibers = fiber_count(block, dim);
    check_carry(carry, fibers, start > 0, "forward")?;
    let fwd: Vec<T> = op.thomas().fwd[start..start + len]
        .iter()
        .map(|&v| T::from_f64(v))
        .collect();
    let sd = block.strides()[dim];
    let batches = fiber_batches(block, dim, tiling);
    let data = block.data_mut();
    let mut out = vec![T::ZERO; fibers];
    for batch in &batches {
        for (i, &w) in fwd.iter().enumerate() {
            for &(id, base) in batch {
                let o = base + i * sd;
                let prev = if i > 0 {
                    Some(data[o - sd])
                } else {
                    carry.map(|c| c[id])
                };
                if let Some(prev) = prev {
                    data[o] += w * prev;
                }
            }
        }
        for &(id, base) in batch {
            out[id] = data[base + (len - 1) * sd];
        }
    }
    Ok(Some(out))
}

/// Backward substitution `v_i = (v_i - upper_i · v_{i+1}) · inv_pivot_i` over
/// the block's segment of each fiber, from its last position down.
/// `carry` holds every fiber's solved value just past the segment (absent
/// when the segment ends at the last position). Returns the first solved
/// value of each fiber for the preceding segment.
pub fn backward_sweep<T: Real>(
    block: &mut NdBlock<T>,
    dim: usize,
    op: &TridiagonalOperator,
    carry: Option<&[T]>,
    tiling: &Tiling,
) -> Result<Option<Vec<T>>> {
    let len = block.shape()[dim];
    if len == 0 {
        return Ok(carry.map(|c| c.to_vec()));
    }
    let n = op.coarse_len();
    let start = block.origin()[dim];
    if start + len > n {
        return Err(Error::Shape(format!(
            "segment [{start}, {}) exceeds {n} coarse positions",
            start + len
        )));
    }
    let fibers = fiber_count(block, dim);
    check_carry(carry, fibers, start + len < n, "backward")?;
    let t = op.thomas();
    let inv: Vec<T> = t.inv_pivot[start..start + len]
        .iter()
        .map(|&v| T::from_f64(v))
        .collect();
    let upper: Vec<T> = (start..start + len)
        .map(|g| if g + 1 < n { T::from_f64(t.upper[g]) } else { T::ZERO })
        .collect();
    let sd = block.strides()[dim];
    let batches = fiber_batches(block, dim, tiling);
    let data = block.data_mut();
    let mut out = vec![T::ZERO; fibers];
    for batch in &batches {
        for i in (0..len).rev() {
            let last = start + i + 1 == n;
            for &(id, base) in batch {
                let o = base + i * sd;
                data[o] = if last {
                    data[o] * inv[i]
                } else {
                    let next = if i + 1 < len {
                        data[o + sd]
                    } else {
                        carry.map(|c| c[id]).unwrap_or(T::ZERO)
                    };
                    (data[o] - upper[i] * next) * inv[i]
                };
            }
        }
        for &(id, base) in batch {
            out[id] = data[base];
        }
    }
    Ok(Some(out))
}
