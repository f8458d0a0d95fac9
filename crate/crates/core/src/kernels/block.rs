use crate::error::{Error, Result};
use crate::grid::{for_each_index, strides};

/// Half-open box `[lo, hi)` of level positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl Region {
    pub fn new(lo: Vec<usize>, hi: Vec<usize>) -> Self {
        debug_assert_eq!(lo.len(), hi.len());
        Self { lo, hi }
    }

    pub fn full(shape: &[usize]) -> Self {
        Self::new(vec![0; shape.len()], shape.to_vec())
    }

    pub fn ndims(&self) -> usize {
        self.lo.len()
    }

    pub fn extent(&self, d: usize) -> usize {
        self.hi[d].saturating_sub(self.lo[d])
    }

    pub fn shape(&self) -> Vec<usize> {
        (0..self.ndims()).map(|d| self.extent(d)).collect()
    }

    pub fn len(&self) -> usize {
        (0..self.ndims()).map(|d| self.extent(d)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, other: &Region) -> bool {
        other.is_empty()
            || (0..self.ndims()).all(|d| self.lo[d] <= other.lo[d] && other.hi[d] <= self.hi[d])
    }

    pub fn intersect(&self, other: &Region) -> Region {
        let lo: Vec<usize> = (0..self.ndims()).map(|d| self.lo[d].max(other.lo[d])).collect();
        let hi: Vec<usize> = (0..self.ndims())
            .map(|d| self.hi[d].min(other.hi[d]).max(lo[d]))
            .collect();
        Region::new(lo, hi)
    }

    /// Grows the box by `width` along `dim`, clipped to `[0, limit)`.
    pub fn widened(&self, dim: usize, width: usize, limit: usize) -> Region {
        let mut r = self.clone();
        if r.extent(dim) > 0 {
            r.lo[dim] = r.lo[dim].saturating_sub(width);
            r.hi[dim] = (r.hi[dim] + width).min(limit);
        }
        r
    }
}

/// Dense box of values (dimension 0 fastest) whose local index 0 sits at global level
/// position `origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct NdBlock<T> {
    origin: Vec<usize>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<T>,
}

impl<T: Copy + Default> NdBlock<T> {
    pub fn new(origin: Vec<usize>, shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if data.len() != n || origin.len() != shape.len() {
            return Err(Error::Shape(format!(
                "{} values for block shape {shape:?}",
                data.len()
            )));
        }
        let strides = strides(&shape);
        Ok(Self {
            origin,
            shape,
            strides,
            data,
        })
    }

    /// Whole-array block with origin at zero.
    pub fn from_vec(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        Self::new(vec![0; shape.len()], shape, data)
    }

    pub fn zeros(region: &Region) -> Self {
        let shape = region.shape();
        let n = shape.iter().product();
        Self {
            origin: region.lo.clone(),
            strides: strides(&shape),
            shape,
            data: vec![T::default(); n],
        }
    }

    pub fn region(&self) -> Region {
        Region::new(
            self.origin.clone(),
            self.origin.iter().zip(&self.shape).map(|(o, n)| o + n).collect(),
        )
    }

    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn ndims(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Local linear offset of global position `pos` (must lie inside).
    #[inline]
    pub fn offset(&self, pos: &[usize]) -> usize {
        pos.iter()
            .zip(&self.origin)
            .zip(&self.strides)
            .map(|((p, o), s)| (p - o) * s)
            .sum()
    }

    pub fn get(&self, pos: &[usize]) -> T {
        self.data[self.offset(pos)]
    }

    /// Copies `region` (which must lie inside this block) into a new block.
    pub fn extract(&self, region: &Region) -> Result<NdBlock<T>> {
        if !self.region().contains(region) {
            return Err(Error::Shape(format!(
                "region {region:?} outside block {:?}",
                self.region()
            )));
        }
        let mut out = NdBlock::zeros(region);
        let shape = region.shape();
        let mut pos = vec![0; shape.len()];
        let mut k = 0;
        for_each_index(&shape, |idx| {
            for d in 0..idx.len() {
                pos[d] = region.lo[d] + idx[d];
            }
            out.data[k] = self.data[self.offset(&pos)];
            k += 1;
        });
        Ok(out)
    }

    /// Overwrites the overlap of `src` and this block with `src`'s values.
    /// Returns the number of elements copied.
    pub fn paste(&mut self, src: &NdBlock<T>) -> usize {
        let overlap = self.region().intersect(&src.region());
        let shape = overlap.shape();
        let mut pos = vec![0; shape.len()];
        let mut count = 0;
        for_each_index(&shape, |idx| {
            for d in 0..idx.len() {
                pos[d] = overlap.lo[d] + idx[d];
            }
            let dst = self.offset(&pos);
            self.data[dst] = src.data[src.offset(&pos)];
            count += 1;
        });
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extract_and_paste() {
        let b = NdBlock::from_vec(vec![4, 3], (0..12).map(|i| i as f64).collect()).unwrap();
        let r = Region::new(vec![1, 1], vec![3, 3]);
        let sub = b.extract(&r).unwrap();
        assert_eq!(sub.data(), &[5.0, 6.0, 9.0, 10.0]);
        assert_eq!(sub.get(&[2, 2]), 10.0);
        let mut z = NdBlock::zeros(&Region::new(vec![2, 0], vec![4, 2]));
        assert_eq!(z.paste(&sub), 1);
        assert_eq!(z.get(&[2, 1]), 6.0);
        assert!(b.extract(&Region::new(vec![0, 0], vec![5, 1])).is_err());
    }

    #[test]
    fn region_ops() {
        let a = Region::new(vec![0, 2], vec![4, 6]);
        let b = Region::new(vec![3, 0], vec![9, 3]);
        assert_eq!(a.intersect(&b), Region::new(vec![3, 2], vec![4, 3]));
        assert_eq!(a.widened(1, 2, 7), Region::new(vec![0, 0], vec![4, 7]));
        let disjoint = Region::new(vec![5, 0], vec![6, 1]);
        assert!(a.intersect(&disjoint).is_empty());
    }
}
