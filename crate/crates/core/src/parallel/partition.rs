use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::Region;

/// Halo width of the coefficient phase, in level positions.
pub const COEFFICIENT_GHOST: usize = 1;
/// Halo width of a mass-transfer sweep along its active dimension.
pub const MASSTRANS_GHOST: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Scheme {
    /// `W` contiguous slabs along the slowest dimension.
    Block,
    /// A `W × W` block grid over the two slowest dimensions; block `(a, b)`
    /// goes to worker `(a + b) mod W`.
    ShiftedRoundRobin,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Block => "block",
            Scheme::ShiftedRoundRobin => "shifted_round_robin",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "block" => Ok(Scheme::Block),
            "shifted_round_robin" | "round_robin" | "rr" => Ok(Scheme::ShiftedRoundRobin),
            _ => Err(format!("unknown scheme `{s}` (expected block or shifted_round_robin)")),
        }
    }
}

/// One box of the global grid owned by `worker`. Under round-robin a worker
/// owns several partitions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub worker: usize,
    /// Global index range `[lo, hi)` per dimension.
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
    /// Block coordinates along the split dimensions.
    pub block: Vec<usize>,
    pub coefficient_ghost: usize,
    pub masstrans_ghost: usize,
    pub scheme: Scheme,
}

impl Partition {
    pub fn region(&self) -> Region {
        Region::new(self.lo.clone(), self.hi.clone())
    }

    pub fn len(&self) -> usize {
        self.region().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Dimensions split by `scheme` on an `nd`-D grid.
pub fn split_dims(nd: usize, scheme: Scheme) -> Vec<usize> {
    match scheme {
        Scheme::Block => vec![nd - 1],
        Scheme::ShiftedRoundRobin if nd >= 2 => vec![nd - 2, nd - 1],
        Scheme::ShiftedRoundRobin => vec![0],
    }
}

/// `n` indices in `parts` near-equal contiguous ranges, larger ones first.
pub(crate) fn even_split(n: usize, parts: usize) -> Vec<(usize, usize)> {
    let base = n / parts;
    let extra = n % parts;
    let mut lo = 0;
    (0..parts)
        .map(|i| {
            let len = base + usize::from(i < extra);
            let r = (lo, lo + len);
            lo += len;
            r
        })
        .collect()
}

/// Splits `shape` among `workers` according to `scheme`.
pub fn partition(shape: &[usize], workers: usize, scheme: Scheme) -> Result<Vec<Partition>> {
    if workers == 0 {
        return Err(Error::InvalidArgument("at least one worker is required".into()));
    }
    if shape.is_empty() {
        return Err(Error::InvalidGrid("empty shape".into()));
    }
    let nd = shape.len();
    let dims = split_dims(nd, scheme);
    for &d in &dims {
        if workers > shape[d] {
            return Err(Error::TooManyWorkers {
                workers,
                available: shape[d],
                dim: d,
            });
        }
    }
    let ranges: Vec<Vec<(usize, usize)>> = dims.iter().map(|&d| even_split(shape[d], workers)).collect();
    let counts = vec![workers; dims.len()];
    let mut out = Vec::new();
    crate::grid::for_each_index(&counts, |blk| {
        let mut lo = vec![0; nd];
        let mut hi = shape.to_vec();
        for (k, &d) in dims.iter().enumerate() {
            (lo[d], hi[d]) = ranges[k][blk[k]];
        }
        out.push(Partition {
            worker: blk.iter().sum::<usize>() % workers,
            lo,
            hi,
            block: blk.to_vec(),
            coefficient_ghost: COEFFICIENT_GHOST,
            masstrans_ghost: MASSTRANS_GHOST,
            scheme,
        });
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_worker_owns_everything() {
        for scheme in [Scheme::Block, Scheme::ShiftedRoundRobin] {
            let p = partition(&[5, 7], 1, scheme).unwrap();
            assert_eq!(p.len(), 1);
            assert_eq!((p[0].lo.clone(), p[0].hi.clone()), (vec![0, 0], vec![5, 7]));
        }
    }

    #[test]
    fn slabs_of_three_planes() {
        let p = partition(&[9, 9, 9], 3, Scheme::Block).unwrap();
        let z: Vec<_> = p.iter().map(|q| (q.worker, q.lo[2], q.hi[2])).collect();
        assert_eq!(z, vec![(0, 0, 3), (1, 3, 6), (2, 6, 9)]);
        assert!(p.iter().all(|q| q.lo[..2] == [0, 0] && q.hi[..2] == [9, 9]));
    }

    #[test]
    fn round_robin_keeps_every_worker_busy() {
        let p = partition(&[9, 9], 3, Scheme::ShiftedRoundRobin).unwrap();
        assert_eq!(p.len(), 9);
        // any row or column of blocks (a pipeline stage) touches all workers
        for fixed in 0..2 {
            for v in 0..3 {
                let mut ws: Vec<_> = p.iter().filter(|q| q.block[fixed] == v).map(|q| q.worker).collect();
                ws.sort();
                assert_eq!(ws, vec![0, 1, 2]);
            }
        }
    }

    #[test]
    fn too_many_workers() {
        assert!(matches!(
            partition(&[9, 2], 3, Scheme::Block),
            Err(Error::TooManyWorkers { workers: 3, available: 2, dim: 1 })
        ));
        assert!(partition(&[2, 9], 3, Scheme::ShiftedRoundRobin).is_err());
    }
}
