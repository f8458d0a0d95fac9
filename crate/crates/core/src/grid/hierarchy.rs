use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

use super::ndindex::{for_each_tensor, strides};
use super::tensor::{validate_geometry, TensorGrid};

/// Nested per-dimension node sets for levels `0..=L`.
///
/// Level `L` is the full grid and level 0 the coarsest. Each coarser level
/// keeps the even positions of the next finer level plus its last node, so
/// both endpoints survive at every level and non-dyadic sizes stay nested.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHierarchy {
    shape: Vec<usize>,
    coords: Vec<Vec<f64>>,
    levels: usize,
    // indices[d][l]: full-grid indices of the level-l nodes along d
    indices: Vec<Vec<Vec<usize>>>,
}

/// Node sets of one level split into the nodes surviving to the next coarser
/// level and the nodes that carry coefficients. Both hold full-grid linear
/// indices in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodePartition {
    pub coarse_nodes: Vec<usize>,
    pub coefficient_nodes: Vec<usize>,
}

fn coarsen(fine: &[usize]) -> Vec<usize> {
    // two-node axes (only admitted for short time axes) stay fixed
    if fine.len() <= 2 {
        return fine.to_vec();
    }
    let last = fine.len() - 1;
    let mut out: Vec<usize> = fine.iter().copied().step_by(2).collect();
    if last % 2 == 1 {
        out.push(fine[last]);
    }
    out
}

/// `floor(log2(n - 1))` for the smallest extent of at least three nodes.
fn default_levels(shape: &[usize]) -> usize {
    let min = shape.iter().copied().filter(|&n| n >= 3).min().unwrap_or(0);
    if min < 3 {
        return 0;
    }
    (usize::BITS - 1 - (min - 1).leading_zeros()) as usize
}

impl GridHierarchy {
    pub fn new(shape: &[usize], coords: &[Vec<f64>], max_levels: Option<usize>) -> Result<Self> {
        validate_geometry(shape, coords, 3)?;
        Self::assemble(shape, coords, max_levels)
    }

    /// Like [`GridHierarchy::new`] but admits two-node axes, which are never
    /// coarsened. Used for short time axes of spatiotemporal stacks.
    pub(crate) fn with_fixed_axes(
        shape: &[usize],
        coords: &[Vec<f64>],
        max_levels: Option<usize>,
    ) -> Result<Self> {
        validate_geometry(shape, coords, 2)?;
        if shape.iter().all(|&n| n < 3) {
            return Err(Error::InvalidGrid(
                "at least one dimension needs 3 or more nodes".into(),
            ));
        }
        Self::assemble(shape, coords, max_levels)
    }

    fn assemble(shape: &[usize], coords: &[Vec<f64>], max_levels: Option<usize>) -> Result<Self> {
        let full = default_levels(shape);
        let levels = match max_levels {
            Some(0) => {
                return Err(Error::InvalidLevel {
                    level: 0,
                    expected: format!("a level count in 1..={full}"),
                })
            }
            Some(m) => m.min(full),
            None => full,
        };
        let indices = shape
            .iter()
            .map(|&n| {
                let mut per_level = vec![(0..n).collect::<Vec<_>>()];
                for _ in 0..levels {
                    let next = coarsen(per_level.last().unwrap());
                    per_level.push(next);
                }
                per_level.reverse();
                per_level
            })
            .collect();
        Ok(Self {
            shape: shape.to_vec(),
            coords: coords.to_vec(),
            levels,
            indices,
        })
    }

    /// True when `dim` keeps all its nodes between `level - 1` and `level`.
    pub fn is_fixed(&self, dim: usize, level: usize) -> bool {
        self.indices[dim][level].len() == self.indices[dim][level - 1].len()
    }

    pub fn build<T: Real>(grid: &TensorGrid<T>, max_levels: Option<usize>) -> Result<Self> {
        Self::new(grid.shape(), grid.coords(), max_levels)
    }

    /// Number of decomposition levels `L`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn ndims(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.levels {
            return Err(Error::InvalidLevel {
                level,
                expected: format!("0..={}", self.levels),
            });
        }
        Ok(())
    }

    /// Full-grid indices of the level-`level` nodes along `dim`.
    pub fn indices(&self, dim: usize, level: usize) -> &[usize] {
        &self.indices[dim][level]
    }

    pub fn level_shape(&self, level: usize) -> Vec<usize> {
        (0..self.ndims())
            .map(|d| self.indices[d][level].len())
            .collect()
    }

    pub fn level_len(&self, level: usize) -> usize {
        self.level_shape(level).iter().product()
    }

    pub fn level_coords(&self, dim: usize, level: usize) -> Vec<f64> {
        self.indices[dim][level]
            .iter()
            .map(|&i| self.coords[dim][i])
            .collect()
    }

    /// Spacings `h_i = x_{i+1} - x_i` of the level-`level` nodes along `dim`.
    pub fn spacings(&self, dim: usize, level: usize) -> Vec<f64> {
        self.level_coords(dim, level)
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect()
    }

    /// Ratios `r_i = h_i / (h_i + h_{i+1})` of adjacent level spacings.
    pub fn ratios(&self, dim: usize, level: usize) -> Vec<f64> {
        self.spacings(dim, level)
            .windows(2)
            .map(|w| w[0] / (w[0] + w[1]))
            .collect()
    }

    /// Positions, within the level-`level` node list along `dim`, of the
    /// nodes that also belong to level `level - 1`.
    pub fn coarse_positions(&self, dim: usize, level: usize) -> Vec<usize> {
        debug_assert!(level >= 1);
        let fine = &self.indices[dim][level];
        let coarse = &self.indices[dim][level - 1];
        let mut out = Vec::with_capacity(coarse.len());
        let mut j = 0;
        for (p, &i) in fine.iter().enumerate() {
            if j < coarse.len() && coarse[j] == i {
                out.push(p);
                j += 1;
            }
        }
        debug_assert_eq!(out.len(), coarse.len());
        out
    }

    /// Splits `N_level` into `N_{level-1}` and the coefficient nodes
    /// `N_level \ N_{level-1}`. A node is coarse iff it is coarse along every
    /// dimension.
    pub fn node_partition(&self, level: usize) -> Result<NodePartition> {
        if level == 0 || level > self.levels {
            return Err(Error::InvalidLevel {
                level,
                expected: format!("1..={}", self.levels),
            });
        }
        let full_strides = strides(&self.shape);
        let fine: Vec<&[usize]> = (0..self.ndims())
            .map(|d| self.indices[d][level].as_slice())
            .collect();
        let coarse: Vec<&[usize]> = (0..self.ndims())
            .map(|d| self.indices[d][level - 1].as_slice())
            .collect();
        let mut coarse_nodes = Vec::new();
        for_each_tensor(&coarse, &full_strides, |i| coarse_nodes.push(i));
        coarse_nodes.sort_unstable();
        let mut coefficient_nodes = Vec::new();
        let mut c = 0;
        let mut all = Vec::new();
        for_each_tensor(&fine, &full_strides, |i| all.push(i));
        all.sort_unstable();
        for i in all {
            if c < coarse_nodes.len() && coarse_nodes[c] == i {
                c += 1;
            } else {
                coefficient_nodes.push(i);
            }
        }
        Ok(NodePartition {
            coarse_nodes,
            coefficient_nodes,
        })
    }
}
