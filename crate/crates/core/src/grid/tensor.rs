use crate::error::{Error, Result};
use crate::real::{Precision, Real};

use super::ndindex::for_each_index;

pub const MAX_DIMS: usize = 4;
pub const MIN_NODES: usize = 3;

/// N-dimensional values on a tensor-product grid with per-dimension
/// strictly increasing coordinates. Values are stored with dimension 0
/// fastest-varying.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorGrid<T> {
    shape: Vec<usize>,
    coords: Vec<Vec<f64>>,
    values: Vec<T>,
}

/// `n` equally spaced coordinates on `[0, 1]`.
pub fn uniform_coords(n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

pub(crate) fn validate_geometry(shape: &[usize], coords: &[Vec<f64>], min_nodes: usize) -> Result<()> {
    if shape.is_empty() || shape.len() > MAX_DIMS {
        return Err(Error::InvalidGrid(format!(
            "{} dimensions given, 1..={MAX_DIMS} supported",
            shape.len()
        )));
    }
    if let Some((d, &n)) = shape.iter().enumerate().find(|(_, &n)| n < min_nodes) {
        return Err(Error::InvalidGrid(format!(
            "dimension {d} has {n} nodes, at least {min_nodes} required"
        )));
    }
    if coords.len() != shape.len() {
        return Err(Error::InvalidGrid(format!(
            "{} coordinate arrays for {} dimensions",
            coords.len(),
            shape.len()
        )));
    }
    for (d, (c, &n)) in coords.iter().zip(shape).enumerate() {
        if c.len() != n {
            return Err(Error::InvalidGrid(format!(
                "dimension {d}: {} coordinates for {n} nodes",
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid(format!("dimension {d}: non-finite coordinate")));
        }
        if let Some(i) = c.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "dimension {d}: coordinates not strictly increasing at index {}",
                i + 1
            )));
        }
    }
    Ok(())
}

impl<T: Real> TensorGrid<T> {
    pub fn new(shape: Vec<usize>, coords: Vec<Vec<f64>>, values: Vec<T>) -> Result<Self> {
        validate_geometry(&shape, &coords, MIN_NODES)?;
        let expected: usize = shape.iter().product();
        if values.len() != expected {
            return Err(Error::Shape(format!(
                "{} values for shape {shape:?} ({expected} nodes)",
                values.len()
            )));
        }
        Ok(Self {
            shape,
            coords,
            values,
        })
    }

    /// Grid with uniform coordinates on `[0, 1]` along every dimension.
    pub fn uniform(shape: Vec<usize>, values: Vec<T>) -> Result<Self> {
        let coords = shape.iter().map(|&n| uniform_coords(n)).collect();
        Self::new(shape, coords, values)
    }

    /// Samples `f` at every node; `f` receives the node's physical coordinates.
    pub fn from_fn(
        shape: Vec<usize>,
        coords: Vec<Vec<f64>>,
        mut f: impl FnMut(&[f64]) -> T,
    ) -> Result<Self> {
        validate_geometry(&shape, &coords, MIN_NODES)?;
        let mut values = Vec::with_capacity(shape.iter().product());
        let mut x = vec![0.0; shape.len()];
        for_each_index(&shape, |idx| {
            for (d, &i) in idx.iter().enumerate() {
                x[d] = coords[d][i];
            }
            values.push(f(&x));
        });
        Self::new(shape, coords, values)
    }

    /// Same geometry, new values.
    pub fn with_values<U: Real>(&self, values: Vec<U>) -> Result<TensorGrid<U>> {
        TensorGrid::new(self.shape.clone(), self.coords.clone(), values)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn ndims(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn precision(&self) -> Precision {
        T::PRECISION
    }

    /// `max - min` over all values (0 for a constant field).
    pub fn value_range(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let v = v.to_f64();
                (lo.min(v), hi.max(v))
            });
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    }
}
