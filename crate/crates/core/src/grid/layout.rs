use crate::error::{Error, Result};

use super::hierarchy::GridHierarchy;
use super::ndindex::{for_each_tensor, strides};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    ToHierarchical,
    ToNatural,
}

/// Coarse-first ordering of one level array.
///
/// Returns the level-`level` linear indices (natural order, dimension 0
/// fastest) arranged as: every node of `N_{level-1}` in its own natural
/// order, then the coefficient nodes grouped by node type. The node type is
/// the bitmask of dimensions along which the node is not coarse; groups are
/// visited in increasing mask order and each group in natural order.
pub fn hierarchical_order(h: &GridHierarchy, level: usize) -> Vec<usize> {
    let nd = h.ndims();
    let shape = h.level_shape(level);
    let st = strides(&shape);
    let coarse: Vec<Vec<usize>> = (0..nd).map(|d| h.coarse_positions(d, level)).collect();
    let fine_only: Vec<Vec<usize>> = (0..nd)
        .map(|d| {
            let mut is_coarse = vec![false; shape[d]];
            for &p in &coarse[d] {
                is_coarse[p] = true;
            }
            (0..shape[d]).filter(|&p| !is_coarse[p]).collect()
        })
        .collect();
    let mut order = Vec::with_capacity(shape.iter().product());
    for mask in 0..(1usize << nd) {
        let lists: Vec<&[usize]> = (0..nd)
            .map(|d| {
                if mask & (1 << d) != 0 {
                    fine_only[d].as_slice()
                } else {
                    coarse[d].as_slice()
                }
            })
            .collect();
        for_each_tensor(&lists, &st, |i| order.push(i));
    }
    order
}

/// Permutation between the natural layout of a level array and its fully
/// recursive coarse-first layout: `[N_0 | C_1 | C_2 | ... | C_level]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayoutMap {
    level: usize,
    // forward[hier_pos] = natural index
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl LayoutMap {
    pub fn new(h: &GridHierarchy, level: usize) -> Result<Self> {
        h.check_level(level)?;
        let mut forward: Vec<usize> = (0..h.level_len(level)).collect();
        for l in (1..=level).rev() {
            let order = hierarchical_order(h, l);
            let prefix: Vec<usize> = order.iter().map(|&i| forward[i]).collect();
            forward[..prefix.len()].copy_from_slice(&prefix);
        }
        let mut inverse = vec![0; forward.len()];
        for (k, &i) in forward.iter().enumerate() {
            inverse[i] = k;
        }
        Ok(Self {
            level,
            forward,
            inverse,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// `forward()[k]` is the natural index stored at hierarchical slot `k`.
    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn apply<T: Copy>(&self, values: &[T], direction: Direction) -> Result<Vec<T>> {
        if values.len() != self.forward.len() {
            return Err(Error::Shape(format!(
                "{} values for a level array of {} nodes",
                values.len(),
                self.forward.len()
            )));
        }
        Ok(match direction {
            Direction::ToHierarchical => self.forward.iter().map(|&i| values[i]).collect(),
            Direction::ToNatural => self.inverse.iter().map(|&k| values[k]).collect(),
        })
    }
}

/// Reorders a level array between natural and coarse-first layouts.
pub fn reorder<T: Copy>(
    values: &[T],
    h: &GridHierarchy,
    level: usize,
    direction: Direction,
) -> Result<Vec<T>> {
    LayoutMap::new(h, level)?.apply(values, direction)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::uniform_coords;
    use proptest::prelude::*;

    fn uniform(shape: &[usize]) -> GridHierarchy {
        let coords: Vec<_> = shape.iter().map(|&n| uniform_coords(n)).collect();
        GridHierarchy::new(shape, &coords, None).unwrap()
    }

    #[test]
    fn one_level_1d() {
        let h = uniform(&[5]);
        let v = [10, 11, 12, 13, 14];
        let map = LayoutMap::new(&h, 1).unwrap();
        // level 1 of a 5-node grid has 3 nodes
        assert_eq!(map.apply(&v[..3], Direction::ToHierarchical).unwrap(), vec![10, 12, 11]);
        let out = reorder(&v, &h, 2, Direction::ToHierarchical).unwrap();
        // [N_0 | C_1 | C_2] = [v0 v4 | v2 | v1 v3]
        assert_eq!(out, vec![10, 14, 12, 11, 13]);
        assert_eq!(hierarchical_order(&h, 2), vec![0, 2, 4, 1, 3]);
    }

    #[test]
    fn constant_stays_constant() {
        let h = uniform(&[9, 5]);
        let v = vec![3.5f64; 45];
        assert_eq!(reorder(&v, &h, 2, Direction::ToHierarchical).unwrap(), v);
    }

    #[test]
    fn length_mismatch() {
        let h = uniform(&[9]);
        assert!(matches!(
            reorder(&[0.0; 8], &h, 3, Direction::ToNatural),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn class_segments_follow_level_sizes() {
        let h = uniform(&[9, 5, 5]);
        let map = LayoutMap::new(&h, h.levels()).unwrap();
        // the first |N_0| slots hold exactly the coarsest nodes
        let n0 = h.level_len(0);
        let mut head: Vec<_> = map.forward()[..n0].to_vec();
        head.sort_unstable();
        let part = h.node_partition(1).unwrap();
        assert_eq!(head, part.coarse_nodes);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn reorder_round_trip(shape in prop::collection::vec(3usize..=33, 1..=3), seed in any::<u64>()) {
            let h = uniform(&shape);
            let n: usize = shape.iter().product();
            let values: Vec<f64> = (0..n).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64 * 0.37).collect();
            for level in 0..=h.levels() {
                let len = h.level_len(level);
                let v = &values[..len];
                let hier = reorder(v, &h, level, Direction::ToHierarchical).unwrap();
                let back = reorder(&hier, &h, level, Direction::ToNatural).unwrap();
                prop_assert_eq!(back.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                                v.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
            }
        }
    }
}
